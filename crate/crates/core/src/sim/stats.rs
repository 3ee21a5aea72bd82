//! Repetition statistics and sweep cells.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::detach::{summarize_run, RunSummary};
use super::GraspScenario;
use crate::target::TargetKind;
use crate::{Error, Result};

/// Mean and sample standard deviation (`n − 1`); the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Sweep cell identity. Physical values are stored as rounded integers
/// (µm, millidegrees, µA) so cells order and compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub target_kind: TargetKind,
    pub target_diameter_um: i64,
    pub angle_mdeg: i64,
    pub spines_per_module: usize,
    pub spine_angle_mdeg: i64,
    pub current_ua: i64,
}

impl CellKey {
    pub fn of(scenario: &GraspScenario) -> Self {
        Self {
            target_kind: scenario.target.kind(),
            target_diameter_um: (scenario.target.nominal_diameter() * 1e6).round() as i64,
            angle_mdeg: (scenario.pull_angle_deg * 1e3).round() as i64,
            spines_per_module: scenario.interface.spines_per_module(),
            spine_angle_mdeg: (scenario.interface.inclination_deg() * 1e3).round() as i64,
            current_ua: (scenario.current * 1e6).round() as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean_max_force: f64,
    pub std_max_force: f64,
    /// Runs in seed order.
    pub runs: Vec<RunSummary>,
}

impl CellStats {
    /// Aggregates runs; the caller keeps them in seed order.
    pub fn from_runs(runs: Vec<RunSummary>) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::Domain("a cell needs at least one repetition".into()));
        }
        let forces: Vec<f64> = runs.iter().map(|r| r.max_force).collect();
        let (mean_max_force, std_max_force) = mean_std(&forces);
        Ok(Self {
            mean_max_force,
            std_max_force,
            runs,
        })
    }

    pub fn reps(&self) -> usize {
        self.runs.len()
    }

    pub fn sem(&self) -> f64 {
        self.std_max_force / (self.reps() as f64).sqrt()
    }
}

pub type SweepStats = BTreeMap<CellKey, CellStats>;

/// Repeats a scenario with seeds `seed, seed + 1, ..., seed + reps − 1`.
pub fn monte_carlo(scenario: &GraspScenario, repetitions: usize) -> Result<CellStats> {
    if repetitions == 0 {
        return Err(Error::Domain("repetitions must be >= 1".into()));
    }
    let runs = (0..repetitions as u64)
        .map(|k| {
            let mut s = scenario.clone();
            s.seed = scenario.seed.wrapping_add(k);
            summarize_run(&s)
        })
        .collect::<Result<Vec<_>>>()?;
    CellStats::from_runs(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spine::{AsperityModel, RelatchWindow, SlopeDistribution};

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[4.0]), (4.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944487358056).abs() < 1e-15);
    }

    #[test]
    fn single_rep_has_zero_spread() {
        let s = GraspScenario::default();
        let cell = monte_carlo(&s, 1).unwrap();
        assert_eq!(cell.std_max_force, 0.0);
        assert_eq!(cell.mean_max_force, summarize_run(&s).unwrap().max_force);
        assert!(monte_carlo(&s, 0).is_err());
    }

    #[test]
    fn deterministic_cap_has_zero_variance() {
        let beta = 35f64.to_radians();
        let mut s = GraspScenario::default();
        s.target = s
            .target
            .clone()
            .with_asperity(AsperityModel::new(0.4, SlopeDistribution::Uniform { min: beta, max: beta }).unwrap());
        s.relatch = RelatchWindow::always();
        s.force_cap = 40.0;
        let cell = monte_carlo(&s, 5).unwrap();
        assert_eq!(cell.std_max_force, 0.0);
        assert_eq!(cell.mean_max_force, 40.0);
        let seeds: Vec<u64> = cell.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![0, 1, 2, 3, 4]);
    }
}
