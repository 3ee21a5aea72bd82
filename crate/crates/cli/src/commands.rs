use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use spinegrip_core::finger::{pressure_profile, PhalanxChain};
use spinegrip_core::sim::{
    argmax_current, calibrate_relatch_with, margin_in_sigma, required_grip_force, simulate_detachment, summarize_run,
    Body, CellKey, CellStats, GraspScenario, RunSummary,
};
use spinegrip_core::spine::HoldingMode;
use spinegrip_core::target::{make_rock, TargetKind, TargetSurface};

use crate::config::{self, ScenarioConfig};
use crate::output::{emit, sig9, write_file, Table};
use crate::{CliError, MissionArgs, PressureArgs, RunArgs};

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "scenario_id",
    "angle_deg",
    "target_diam_mm",
    "spine_angle_deg",
    "spines_per_module",
    "current_a",
    "seed",
    "max_force_n",
    "first_slip_n",
    "detached",
];

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Global {
    pub workers: Option<usize>,
    pub mode: Option<HoldingMode>,
}

fn load(path: &Path, global: &Global) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let mut cfg = config::parse(&text).map_err(CliError::Config)?;
    if let Some(mode) = global.mode {
        cfg.scenario.mode = mode;
    }
    Ok(cfg)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if workers == Some(0) {
        return Err(CliError::config("--workers must be >= 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(CliError::runtime)
}

/// Runs every (scenario, repetition) pair on the pool; results come back
/// grouped per scenario in seed order whatever the execution order.
fn run_cells(pool: &rayon::ThreadPool, scenarios: &[GraspScenario], reps: usize) -> Result<Vec<CellStats>, CliError> {
    let jobs: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|c| (0..reps as u64).map(move |k| (c, k)))
        .collect();
    let runs: Vec<RunSummary> = pool
        .install(|| {
            jobs.par_iter()
                .map(|&(c, k)| {
                    let mut s = scenarios[c].clone();
                    s.seed = scenarios[c].seed.wrapping_add(k);
                    summarize_run(&s)
                })
                .collect::<spinegrip_core::Result<Vec<_>>>()
        })
        .map_err(CliError::runtime)?;
    runs.chunks(reps)
        .map(|c| CellStats::from_runs(c.to_vec()).map_err(CliError::runtime))
        .collect()
}

fn summary_prefix(id: &str, s: &GraspScenario) -> Vec<String> {
    vec![
        id.to_string(),
        sig9(s.pull_angle_deg),
        sig9(s.target.nominal_diameter() * 1000.0),
        sig9(s.interface.inclination_deg()),
        s.interface.spines_per_module().to_string(),
        sig9(s.current),
    ]
}

fn optional(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

pub fn pressure(args: &PressureArgs) -> Result<(), CliError> {
    let lengths = args
        .lengths_m
        .clone()
        .unwrap_or_else(|| vec![args.length_m; args.phalanges]);
    let invalid = |e: spinegrip_core::Error| CliError::config(e.to_string());
    let chain = PhalanxChain::new(lengths, args.pulley_radius_m, 0.0, std::f64::consts::FRAC_PI_2).map_err(invalid)?;
    let tension = match (args.tension_n, args.torque_nm) {
        (Some(t), None) => t,
        (None, Some(tau)) => tau / chain.pulley_radius(),
        _ => return Err(CliError::config("give exactly one of --tension-n or --torque-nm")),
    };
    let profile = pressure_profile(&chain, tension).map_err(invalid)?;
    let mut table = Table::with_columns(&["phalanx_index", "pressure_n_per_m"])?;
    for (j, p) in profile.pressures.iter().enumerate() {
        table.row(&[(j + 1).to_string(), sig9(*p)])?;
    }
    emit(args.out.as_deref(), &table.into_bytes()?)
}

fn required_out(args: &RunArgs) -> Result<&Path, CliError> {
    args.out
        .as_deref()
        .ok_or_else(|| CliError::config("--out DIR is required"))
}

pub fn detach(args: &RunArgs, global: &Global) -> Result<(), CliError> {
    let cfg = load(&args.config, global)?;
    let out = required_out(args)?;
    let reps = args.reps.unwrap_or(cfg.reps);
    if reps == 0 {
        return Err(CliError::config("--reps must be >= 1"));
    }
    let base_seed = args.seed.unwrap_or(cfg.scenario.seed);
    let pool = pool(global.workers)?;
    let seeds: Vec<u64> = (0..reps as u64).map(|k| base_seed.wrapping_add(k)).collect();
    let traces = pool
        .install(|| {
            seeds
                .par_iter()
                .map(|&seed| {
                    let mut s = cfg.scenario.clone();
                    s.seed = seed;
                    simulate_detachment(&s)
                })
                .collect::<spinegrip_core::Result<Vec<_>>>()
        })
        .map_err(CliError::runtime)?;

    let fingers = cfg.scenario.finger_azimuths_deg.len();
    let mut header = vec!["time_s".to_string(), "applied_force_n".to_string()];
    header.extend((1..=fingers).map(|i| format!("finger_{i}_load_n")));
    header.push("slip_count_cum".to_string());

    let mut summary = Table::with_columns(&SUMMARY_COLUMNS)?;
    for (seed, trace) in seeds.iter().zip(&traces) {
        let mut table = Table::new(&header)?;
        let mut slips = 0;
        for sample in &trace.samples {
            slips += sample.slips.len();
            let mut row = vec![sig9(sample.time), sig9(sample.applied_force)];
            row.extend(sample.finger_loads.iter().map(|l| sig9(*l)));
            row.push(slips.to_string());
            table.row(&row)?;
        }
        write_file(&out.join(format!("trace_seed{seed}.csv")), &table.into_bytes()?)?;

        let mut row = summary_prefix(&cfg.id, &cfg.scenario);
        row.extend([
            seed.to_string(),
            sig9(trace.max_force),
            optional(trace.first_slip_force),
            trace.detached.to_string(),
        ]);
        summary.row(&row)?;
    }
    write_file(&out.join("summary.csv"), &summary.into_bytes()?)
}

fn with_diameter(target: &TargetSurface, diameter: f64) -> spinegrip_core::Result<TargetSurface> {
    let asperity = *target.asperity();
    match (target.kind(), target.rock_params()) {
        (TargetKind::Rock, Some(rock)) => {
            make_rock(rock.seed, diameter, rock.amplitude, rock.correlation_scale).map(|t| t.with_asperity(asperity))
        }
        _ => TargetSurface::sphere(diameter, asperity),
    }
}

/// Every combination of the sweep axes, one scenario per distinct cell, in
/// canonical cell order.
pub fn sweep_cells(cfg: &ScenarioConfig) -> Result<BTreeMap<CellKey, GraspScenario>, CliError> {
    let base = &cfg.scenario;
    let axes = &cfg.sweep;
    let diameters = axes
        .target_diameters_m
        .clone()
        .unwrap_or_else(|| vec![base.target.nominal_diameter()]);
    let angles = axes.angles_deg.clone().unwrap_or_else(|| vec![base.pull_angle_deg]);
    let spine_angles = axes
        .spine_angles_deg
        .clone()
        .unwrap_or_else(|| vec![base.interface.inclination_deg()]);
    let spine_counts = axes
        .spines_per_module
        .clone()
        .unwrap_or_else(|| vec![base.interface.spines_per_module()]);
    let currents = axes.currents_a.clone().unwrap_or_else(|| vec![base.current]);

    let mut errors = Vec::new();
    let mut cells = BTreeMap::new();
    for &d in &diameters {
        let target = match with_diameter(&base.target, d) {
            Ok(t) => t,
            Err(e) => {
                errors.push(format!("[sweep] target diameter {d} m: {e}"));
                continue;
            }
        };
        for &angle in &angles {
            for &psi in &spine_angles {
                for &count in &spine_counts {
                    let interface = match spinegrip_core::spine::SpineInterface::new(count, psi) {
                        Ok(i) => i,
                        Err(e) => {
                            errors.push(format!("[sweep] interface ({count}, {psi}°): {e}"));
                            continue;
                        }
                    };
                    for &current in &currents {
                        let mut s = base.clone();
                        s.target = target.clone();
                        s.pull_angle_deg = angle;
                        s.interface = interface;
                        s.current = current;
                        if let Err(e) = s.validate() {
                            errors.push(format!("[sweep] {e}"));
                            continue;
                        }
                        cells.insert(CellKey::of(&s), s);
                    }
                }
            }
        }
    }
    if !errors.is_empty() {
        errors.dedup();
        return Err(CliError::Config(errors));
    }
    Ok(cells)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

pub fn sweep(args: &RunArgs, global: &Global) -> Result<(), CliError> {
    let mut cfg = load(&args.config, global)?;
    if let Some(seed) = args.seed {
        cfg.scenario.seed = seed;
    }
    let reps = args.reps.or(cfg.sweep.reps).unwrap_or(cfg.reps);
    if reps == 0 {
        return Err(CliError::config("--reps must be >= 1"));
    }
    let cells = sweep_cells(&cfg)?;
    let scenarios: Vec<GraspScenario> = cells.into_values().collect();
    let stats = run_cells(&pool(global.workers)?, &scenarios, reps)?;

    let mut columns: Vec<&str> = SUMMARY_COLUMNS.to_vec();
    columns.extend(["mean_max_force_n", "std_max_force_n"]);
    let mut table = Table::with_columns(&columns)?;
    for (s, cell) in scenarios.iter().zip(&stats) {
        let max = cell.runs.iter().map(|r| r.max_force).fold(f64::NEG_INFINITY, f64::max);
        let first = median(cell.runs.iter().filter_map(|r| r.first_slip_force).collect());
        let detached = cell.runs.iter().filter(|r| r.detached).count();
        let mut row = summary_prefix(&cfg.id, s);
        row.extend([
            s.seed.to_string(),
            sig9(max),
            optional(first),
            detached.to_string(),
            sig9(cell.mean_max_force),
            sig9(cell.std_max_force),
        ]);
        table.row(&row)?;
    }
    emit(args.out.as_deref(), &table.into_bytes()?)
}

pub fn mission(args: &MissionArgs) -> Result<(), CliError> {
    let (label, gravity) = match Body::from_name(&args.gravity) {
        Some(b) => (b.name().to_string(), b.gravity()),
        None => match args.gravity.parse::<f64>() {
            Ok(g) => ("custom".to_string(), g),
            Err(_) => {
                let known: Vec<String> = Body::ALL
                    .iter()
                    .map(|b| format!("{} ({} m/s²)", b.name(), b.gravity()))
                    .collect();
                return Err(CliError::config(format!(
                    "unknown body `{}`; known bodies: {}; or give gravity in m/s²",
                    args.gravity,
                    known.join(", ")
                )));
            }
        },
    };
    let required =
        required_grip_force(args.mass_kg, gravity, args.stance_legs).map_err(|e| CliError::config(e.to_string()))?;
    let mut columns = vec!["body", "gravity_m_per_s2", "mass_kg", "stance_legs", "required_force_n"];
    let mut row = vec![
        label,
        sig9(gravity),
        sig9(args.mass_kg),
        args.stance_legs.to_string(),
        sig9(required),
    ];
    if let (Some(mean), Some(std)) = (args.capability_mean_n, args.capability_std_n) {
        let margin = margin_in_sigma(mean, std, required).map_err(|e| CliError::config(e.to_string()))?;
        columns.extend(["capability_mean_n", "capability_std_n", "margin_sigma"]);
        row.extend([sig9(mean), sig9(std), sig9(margin)]);
    }
    let mut table = Table::with_columns(&columns)?;
    table.row(&row)?;
    emit(args.out.as_deref(), &table.into_bytes()?)
}

pub fn calibrate(args: &RunArgs, global: &Global) -> Result<(), CliError> {
    let mut cfg = load(&args.config, global)?;
    let out = required_out(args)?.to_path_buf();
    if let Some(seed) = args.seed {
        cfg.scenario.seed = seed;
    }
    let reps = args.reps.unwrap_or(cfg.calibration.reps);
    if reps == 0 {
        return Err(CliError::config("--reps must be >= 1"));
    }
    if cfg.calibration.candidates.is_empty() {
        return Err(CliError::config("relatch search space is empty"));
    }
    let pool = pool(global.workers)?;
    let result = calibrate_relatch_with(
        &cfg.scenario,
        &cfg.calibration.grid,
        &cfg.calibration.candidates,
        reps,
        |scenarios, reps| run_cells(&pool, scenarios, reps).map_err(|e| spinegrip_core::Error::State(e.to_string())),
    )
    .map_err(CliError::runtime)?;

    let w = result.window;
    let peak = argmax_current(&result.curve).map(|i| result.curve[i].current);
    let snippet = format!(
        "# converged = {}, peak current = {} A, score = {} N\n[relatch]\nlow_n = {}\nhigh_n = {}\nfloor = {}\nrolloff_n = {}\n",
        result.converged,
        peak.map(sig9).unwrap_or_default(),
        sig9(result.score),
        w.low,
        w.high,
        w.floor,
        w.rolloff
    );
    write_file(&out.join("relatch.toml"), snippet.as_bytes())?;

    let mut table = Table::with_columns(&["current_a", "mean_max_force_n", "std_max_force_n"])?;
    for p in &result.curve {
        table.row(&[sig9(p.current), sig9(p.mean_max_force), sig9(p.std_max_force)])?;
    }
    write_file(&out.join("current_response.csv"), &table.into_bytes()?)?;

    print!("{snippet}");
    if !result.converged {
        eprintln!("warning: no candidate peaks inside the best current band; best found reported");
    }
    Ok(())
}
