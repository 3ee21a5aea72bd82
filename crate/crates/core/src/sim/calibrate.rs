//! Fitting the re-latch window to an observed best actuation band.
//!
//! For every candidate window the base scenario is run over the current
//! grid; a candidate complies when the current with the highest mean
//! maximum force falls inside the best band. Candidates are ranked by how
//! far the best in-band mean exceeds the best out-of-band mean.

use serde::{Deserialize, Serialize};

use super::stats::{monte_carlo, CellStats};
use super::GraspScenario;
use crate::spine::RelatchWindow;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentGrid {
    pub currents: Vec<f64>,
    pub best_currents: Vec<f64>,
}

impl CurrentGrid {
    /// 0.15 A to 0.275 A in 0.025 A steps, best band {0.225, 0.25} A.
    pub fn standard() -> Self {
        Self {
            currents: vec![0.15, 0.175, 0.2, 0.225, 0.25, 0.275],
            best_currents: vec![0.225, 0.25],
        }
    }

    fn in_band(&self, current: f64) -> bool {
        self.best_currents.iter().any(|b| (b - current).abs() < 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentPoint {
    pub current: f64,
    pub mean_max_force: f64,
    pub std_max_force: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub window: RelatchWindow,
    pub curve: Vec<CurrentPoint>,
    pub converged: bool,
    /// Best in-band mean minus best out-of-band mean (N).
    pub score: f64,
    pub candidates_evaluated: usize,
}

/// Repetitions per current used by the default search.
pub const DEFAULT_CALIBRATION_REPS: usize = 50;

/// Search space that produced [`super::DEFAULT_RELATCH`]: window edges in
/// newtons of tether tension, floor probability and roll-off width.
pub fn default_candidates() -> Vec<RelatchWindow> {
    candidate_windows(
        &[40.0, 45.0, 50.0, 55.0],
        &[55.0, 60.0, 65.0, 70.0],
        &[0.0, 0.1, 0.2, 0.4],
        &[2.0, 5.0, 10.0],
    )
}

/// Cartesian product of window parameters, keeping only valid windows.
pub fn candidate_windows(lows: &[f64], highs: &[f64], floors: &[f64], rolloffs: &[f64]) -> Vec<RelatchWindow> {
    let mut out = Vec::new();
    for &low in lows {
        for &high in highs {
            for &floor in floors {
                for &rolloff in rolloffs {
                    let w = RelatchWindow {
                        low,
                        high,
                        floor,
                        rolloff,
                    };
                    if w.validate().is_ok() {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

/// Index of the highest mean on the curve; the first one wins ties.
pub fn argmax_current(curve: &[CurrentPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in curve.iter().enumerate() {
        if best.is_none_or(|b| p.mean_max_force > curve[b].mean_max_force) {
            best = Some(i);
        }
    }
    best
}

fn score(grid: &CurrentGrid, curve: &[CurrentPoint]) -> (f64, bool) {
    let best_in = curve
        .iter()
        .filter(|p| grid.in_band(p.current))
        .map(|p| p.mean_max_force)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_out = curve
        .iter()
        .filter(|p| !grid.in_band(p.current))
        .map(|p| p.mean_max_force)
        .fold(f64::NEG_INFINITY, f64::max);
    let compliant = argmax_current(curve).is_some_and(|i| grid.in_band(curve[i].current));
    let s = if best_out.is_finite() {
        best_in - best_out
    } else {
        best_in
    };
    (s, compliant)
}

/// Scenarios of one candidate over the current grid.
pub fn grid_scenarios(base: &GraspScenario, window: RelatchWindow, currents: &[f64]) -> Vec<GraspScenario> {
    currents
        .iter()
        .map(|&c| {
            let mut s = base.clone();
            s.relatch = window;
            s.current = c;
            s
        })
        .collect()
}

/// Calibrates sequentially; see [`calibrate_relatch_with`].
pub fn calibrate_relatch(
    base: &GraspScenario,
    grid: &CurrentGrid,
    candidates: &[RelatchWindow],
    reps: usize,
) -> Result<CalibrationResult> {
    calibrate_relatch_with(base, grid, candidates, reps, |scenarios, reps| {
        scenarios.iter().map(|s| monte_carlo(s, reps)).collect()
    })
}

/// Grid-searches `candidates`, evaluating batches of cells with `evaluate`
/// (which must return one [`CellStats`] per scenario, in order).
pub fn calibrate_relatch_with<F>(
    base: &GraspScenario,
    grid: &CurrentGrid,
    candidates: &[RelatchWindow],
    reps: usize,
    evaluate: F,
) -> Result<CalibrationResult>
where
    F: Fn(&[GraspScenario], usize) -> Result<Vec<CellStats>>,
{
    if candidates.is_empty() {
        return Err(Error::Domain("relatch search space is empty".into()));
    }
    if grid.currents.is_empty() || grid.best_currents.is_empty() {
        return Err(Error::Domain("current grid and best band must be non-empty".into()));
    }
    let scenarios: Vec<GraspScenario> = candidates
        .iter()
        .flat_map(|w| grid_scenarios(base, *w, &grid.currents))
        .collect();
    let cells = evaluate(&scenarios, reps)?;
    if cells.len() != scenarios.len() {
        return Err(Error::State(format!(
            "evaluator returned {} cells for {} scenarios",
            cells.len(),
            scenarios.len()
        )));
    }

    let mut best: Option<CalibrationResult> = None;
    for (w, chunk) in candidates.iter().zip(cells.chunks(grid.currents.len())) {
        let curve: Vec<CurrentPoint> = grid
            .currents
            .iter()
            .zip(chunk)
            .map(|(&current, cell)| CurrentPoint {
                current,
                mean_max_force: cell.mean_max_force,
                std_max_force: cell.std_max_force,
            })
            .collect();
        let (s, compliant) = score(grid, &curve);
        let better = match &best {
            None => true,
            Some(b) => (compliant && !b.converged) || (compliant == b.converged && s > b.score),
        };
        if better {
            best = Some(CalibrationResult {
                window: *w,
                curve,
                converged: compliant,
                score: s,
                candidates_evaluated: candidates.len(),
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(current: f64, mean: f64) -> CurrentPoint {
        CurrentPoint {
            current,
            mean_max_force: mean,
            std_max_force: 0.0,
        }
    }

    #[test]
    fn scoring_prefers_in_band_peaks() {
        let grid = CurrentGrid::standard();
        let peaked: Vec<CurrentPoint> = grid
            .currents
            .iter()
            .zip([10.0, 12.0, 14.0, 20.0, 18.0, 15.0])
            .map(|(c, m)| point(*c, m))
            .collect();
        let (s, ok) = score(&grid, &peaked);
        assert!(ok);
        assert_eq!(s, 20.0 - 15.0);
        let rising: Vec<CurrentPoint> = grid
            .currents
            .iter()
            .zip([10.0, 12.0, 14.0, 16.0, 18.0, 20.0])
            .map(|(c, m)| point(*c, m))
            .collect();
        assert!(!score(&grid, &rising).1);
    }

    #[test]
    fn candidate_product_skips_invalid() {
        let c = candidate_windows(&[100.0, 200.0], &[150.0], &[0.1], &[10.0, 20.0]);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|w| w.low == 100.0));
    }

    #[test]
    fn single_compliant_candidate_is_returned() {
        let grid = CurrentGrid::standard();
        let window = RelatchWindow {
            low: 1.0,
            high: 2.0,
            floor: 0.5,
            rolloff: 1.0,
        };
        let fake = |scenarios: &[GraspScenario], _reps: usize| -> Result<Vec<CellStats>> {
            Ok(scenarios
                .iter()
                .map(|s| CellStats {
                    // peak at 0.225 A
                    mean_max_force: 100.0 - 1000.0 * (s.current - 0.225).abs(),
                    std_max_force: 0.0,
                    runs: Vec::new(),
                })
                .collect())
        };
        let r = calibrate_relatch_with(&GraspScenario::default(), &grid, &[window], 1, fake).unwrap();
        assert!(r.converged);
        assert_eq!(r.window, window);
        assert!(calibrate_relatch(&GraspScenario::default(), &grid, &[], 1).is_err());
    }
}
