use spinegrip_core::sim::{
    calibrate_relatch, grid_scenarios, monte_carlo, simulate_detachment, summarize_run, CurrentGrid, GraspScenario,
};
use spinegrip_core::spine::{AsperityModel, RelatchWindow, SlopeDistribution};
use spinegrip_core::target::TargetSurface;

fn scenario(seed: u64) -> GraspScenario {
    GraspScenario {
        seed,
        ..Default::default()
    }
}

#[test]
fn cells_are_the_runs_of_consecutive_seeds() {
    let base = scenario(40);
    let cell = monte_carlo(&base, 6).unwrap();
    for (k, run) in cell.runs.iter().enumerate() {
        let own = summarize_run(&scenario(40 + k as u64)).unwrap();
        assert_eq!(run.seed, 40 + k as u64);
        assert_eq!(run.max_force.to_bits(), own.max_force.to_bits());
    }
    let forces: Vec<f64> = cell.runs.iter().map(|r| r.max_force).collect();
    let mean = forces.iter().sum::<f64>() / 6.0;
    let var = forces.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / 5.0;
    assert!((cell.mean_max_force - mean).abs() < 1e-12 * mean);
    assert!((cell.std_max_force - var.sqrt()).abs() < 1e-9 * var.sqrt().max(1.0));
}

#[test]
fn single_repetition_has_zero_spread() {
    let cell = monte_carlo(&scenario(3), 1).unwrap();
    assert_eq!(cell.std_max_force, 0.0);
    assert_eq!(cell.mean_max_force, cell.runs[0].max_force);
    assert!(monte_carlo(&scenario(3), 0).is_err());
}

#[test]
fn runs_repeat_bitwise() {
    let s = GraspScenario {
        pull_angle_deg: 45.0,
        pull_azimuth_deg: 20.0,
        ..scenario(9)
    };
    let a = simulate_detachment(&s).unwrap();
    let b = simulate_detachment(&s).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.applied_force.to_bits(), y.applied_force.to_bits());
        assert_eq!(x.finger_loads, y.finger_loads);
    }
}

#[test]
fn unslippable_grip_holds_to_the_cap() {
    let asperity = AsperityModel::new(
        0.9,
        SlopeDistribution::Uniform {
            min: 47.5f64.to_radians(),
            max: 48f64.to_radians(),
        },
    )
    .unwrap();
    let s = GraspScenario {
        target: TargetSurface::sphere(0.27, asperity).unwrap(),
        force_cap: 150.0,
        ..scenario(1)
    };
    let trace = simulate_detachment(&s).unwrap();
    assert_eq!(trace.max_force, 150.0);
    assert!(!trace.detached);
    assert_eq!(trace.first_slip_force, None);
}

#[test]
fn calibration_curve_is_an_ordinary_sweep() {
    let base = scenario(0);
    let grid = CurrentGrid::standard();
    let window = RelatchWindow {
        low: 45.0,
        high: 60.0,
        floor: 0.1,
        rolloff: 5.0,
    };
    let result = calibrate_relatch(&base, &grid, &[window], 4).unwrap();
    assert_eq!(result.window, window);
    assert_eq!(result.candidates_evaluated, 1);
    for (point, s) in result.curve.iter().zip(grid_scenarios(&base, window, &grid.currents)) {
        let cell = monte_carlo(&s, 4).unwrap();
        assert_eq!(point.current, s.current);
        assert_eq!(point.mean_max_force.to_bits(), cell.mean_max_force.to_bits());
        assert_eq!(point.std_max_force.to_bits(), cell.std_max_force.to_bits());
    }
}
