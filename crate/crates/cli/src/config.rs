//! Scenario files.
//!
//! A scenario file is TOML with one table per concern. Every physical
//! quantity carries its unit in the key name (`diameter_m`, `current_a`,
//! `spine_angle_deg`, ...). Unknown tables and keys are rejected, and all
//! problems found in a file are reported together.
//!
//! ```toml
//! [scenario]
//! id = "d2-axial"
//! seed = 0
//!
//! [target]
//! kind = "sphere"
//! diameter_m = 0.27
//! ```

use spinegrip_core::actuation::{ActuatorModel, TorqueAnchor};
use spinegrip_core::finger::PhalanxChain;
use spinegrip_core::sim::{default_candidates, CurrentGrid, GraspScenario, DEFAULT_CALIBRATION_REPS};
use spinegrip_core::spine::{AsperityModel, HoldingMode, RelatchWindow, SlopeDistribution, SpineInterface};
use spinegrip_core::target::{make_rock, TargetSurface};
use toml::{Table, Value};

const SCHEMA: &[(&str, &[&str])] = &[
    (
        "scenario",
        &[
            "id",
            "seed",
            "reps",
            "mode",
            "pull_angle_deg",
            "pull_azimuth_deg",
            "current_a",
            "ramp_rate_n_per_s",
            "force_step_n",
            "force_cap_n",
            "max_steps",
        ],
    ),
    ("gripper", &["finger_azimuths_deg", "standoff_m"]),
    (
        "finger",
        &[
            "phalanx_lengths_m",
            "pulley_radius_m",
            "opening_stiffness_nm_per_rad",
            "joint_limit_deg",
        ],
    ),
    ("interface", &["spines_per_module", "spine_angle_deg"]),
    (
        "target",
        &[
            "kind",
            "diameter_m",
            "base_friction",
            "slope_distribution",
            "slope_min_deg",
            "slope_max_deg",
            "slope_mean_deg",
            "slope_sd_deg",
            "rock_seed",
            "roughness_m",
            "correlation_m",
        ],
    ),
    (
        "actuator",
        &[
            "low_current_a",
            "low_torque_nm",
            "high_current_a",
            "high_torque_nm",
            "pitch_m",
            "efficiency",
            "desync_stiffness_n_per_m",
            "max_plate_travel_m",
            "preload_n",
        ],
    ),
    ("relatch", &["low_n", "high_n", "floor", "rolloff_n"]),
    (
        "sweep",
        &[
            "reps",
            "angles_deg",
            "currents_a",
            "target_diameters_m",
            "spine_angles_deg",
            "spines_per_module",
        ],
    ),
    (
        "calibration",
        &[
            "reps",
            "currents_a",
            "best_currents_a",
            "low_n",
            "high_n",
            "floor",
            "rolloff_n",
        ],
    ),
];

const REQUIRED: &[(&str, &str)] = &[
    ("scenario", "id"),
    ("scenario", "seed"),
    ("target", "kind"),
    ("target", "diameter_m"),
];

const UNIT_SUFFIXES: &[&str] = &[
    "_nm_per_rad",
    "_n_per_m",
    "_n_per_s",
    "_m_per_s2",
    "_deg",
    "_rad",
    "_mm",
    "_cm",
    "_um",
    "_ma",
    "_nm",
    "_kg",
    "_m",
    "_a",
    "_n",
    "_s",
];

fn stem(key: &str) -> &str {
    UNIT_SUFFIXES.iter().find_map(|s| key.strip_suffix(s)).unwrap_or(key)
}

/// Sweep axes; an absent axis keeps the base scenario's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    pub reps: Option<usize>,
    pub angles_deg: Option<Vec<f64>>,
    pub currents_a: Option<Vec<f64>>,
    pub target_diameters_m: Option<Vec<f64>>,
    pub spine_angles_deg: Option<Vec<f64>>,
    pub spines_per_module: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSpec {
    pub reps: usize,
    pub grid: CurrentGrid,
    pub candidates: Vec<RelatchWindow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub reps: usize,
    pub scenario: GraspScenario,
    pub sweep: SweepAxes,
    pub calibration: CalibrationSpec,
}

struct Reader<'a> {
    doc: &'a Table,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn check_layout(&mut self) {
        for (name, value) in self.doc {
            let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == name) else {
                let known: Vec<&str> = SCHEMA.iter().map(|(s, _)| *s).collect();
                self.errors
                    .push(format!("unknown table [{name}] (known tables: {})", known.join(", ")));
                continue;
            };
            let Some(table) = value.as_table() else {
                self.errors.push(format!("[{name}] must be a table"));
                continue;
            };
            for key in table.keys() {
                if keys.contains(&key.as_str()) {
                    continue;
                }
                let hint = keys
                    .iter()
                    .find(|k| stem(k) == stem(key))
                    .map(|k| format!(" (wrong or missing unit suffix, expected `{k}`)"))
                    .unwrap_or_default();
                self.errors.push(format!("unknown key `{key}` in [{name}]{hint}"));
            }
        }
        for (section, key) in REQUIRED {
            if self.value(section, key).is_none() {
                self.errors.push(format!("missing required key `{key}` in [{section}]"));
            }
        }
    }

    fn value(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.doc.get(section)?.as_table()?.get(key)
    }

    fn type_error(&mut self, section: &str, key: &str, expected: &str) {
        self.errors.push(format!("`{key}` in [{section}] must be {expected}"));
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.value(section, key)?;
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.type_error(section, key, "a number");
                None
            }
        }
    }

    fn count(&mut self, section: &str, key: &str) -> Option<usize> {
        let v = self.value(section, key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i as usize),
            _ => {
                self.type_error(section, key, "a non-negative integer");
                None
            }
        }
    }

    fn seed(&mut self, section: &str, key: &str) -> Option<u64> {
        self.count(section, key).map(|c| c as u64)
    }

    fn string(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.value(section, key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.type_error(section, key, "a string");
                None
            }
        }
    }

    fn floats(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let v = self.value(section, key)?;
        let parsed = v.as_array().and_then(|items| {
            items
                .iter()
                .map(|x| match x {
                    Value::Float(f) => Some(*f),
                    Value::Integer(i) => Some(*i as f64),
                    _ => None,
                })
                .collect::<Option<Vec<f64>>>()
        });
        if parsed.is_none() {
            self.type_error(section, key, "an array of numbers");
        }
        parsed
    }

    fn counts(&mut self, section: &str, key: &str) -> Option<Vec<usize>> {
        let v = self.value(section, key)?;
        let parsed = v.as_array().and_then(|items| {
            items
                .iter()
                .map(|x| x.as_integer().filter(|i| *i >= 0).map(|i| i as usize))
                .collect::<Option<Vec<usize>>>()
        });
        if parsed.is_none() {
            self.type_error(section, key, "an array of non-negative integers");
        }
        parsed
    }

    fn check<T>(&mut self, context: &str, result: spinegrip_core::Result<T>) -> Option<T> {
        result.map_err(|e| self.errors.push(format!("{context}: {e}"))).ok()
    }
}

pub fn parse_mode(s: &str) -> Option<HoldingMode> {
    match s {
        "literal" => Some(HoldingMode::Literal),
        "consistent" => Some(HoldingMode::ConsistentUnits),
        _ => None,
    }
}

fn non_empty(r: &mut Reader, section: &str, key: &str, axis: Option<Vec<f64>>) -> Option<Vec<f64>> {
    if let Some(a) = &axis {
        if a.is_empty() {
            r.errors.push(format!("`{key}` in [{section}] must not be empty"));
        }
    }
    axis
}

/// Parses and validates a scenario file, returning every violation found.
pub fn parse(text: &str) -> Result<ScenarioConfig, Vec<String>> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| vec![format!("invalid TOML: {}", e.message())])?;
    let mut r = Reader {
        doc: &doc,
        errors: Vec::new(),
    };
    r.check_layout();
    let base = GraspScenario::default();

    let id = r.string("scenario", "id").unwrap_or("").to_string();
    let seed = r.seed("scenario", "seed").unwrap_or(0);
    let reps = r.count("scenario", "reps").unwrap_or(1);
    if reps == 0 {
        r.errors.push("`reps` in [scenario] must be >= 1".into());
    }
    let mode = match r.string("scenario", "mode") {
        None => base.mode,
        Some(m) => parse_mode(m).unwrap_or_else(|| {
            r.errors.push(format!(
                "`mode` in [scenario] must be \"literal\" or \"consistent\" (got \"{m}\")"
            ));
            base.mode
        }),
    };
    let pull_angle_deg = r.float("scenario", "pull_angle_deg").unwrap_or(base.pull_angle_deg);
    let pull_azimuth_deg = r.float("scenario", "pull_azimuth_deg").unwrap_or(base.pull_azimuth_deg);
    let current = r.float("scenario", "current_a").unwrap_or(base.current);
    let ramp_rate = r.float("scenario", "ramp_rate_n_per_s").unwrap_or(base.ramp_rate);
    let force_step = r.float("scenario", "force_step_n").unwrap_or(base.force_step);
    let force_cap = r.float("scenario", "force_cap_n").unwrap_or(base.force_cap);
    let max_steps = r.count("scenario", "max_steps").unwrap_or(base.max_steps);

    let finger_azimuths_deg = r
        .floats("gripper", "finger_azimuths_deg")
        .unwrap_or_else(|| base.finger_azimuths_deg.clone());
    let standoff = r.float("gripper", "standoff_m").unwrap_or(base.standoff);

    let lengths = r
        .floats("finger", "phalanx_lengths_m")
        .unwrap_or_else(|| base.chain.lengths().to_vec());
    let pulley_radius = r
        .float("finger", "pulley_radius_m")
        .unwrap_or(base.chain.pulley_radius());
    let opening = r
        .float("finger", "opening_stiffness_nm_per_rad")
        .unwrap_or(base.chain.opening_spring_stiffness());
    let joint_limit = r
        .float("finger", "joint_limit_deg")
        .map(f64::to_radians)
        .unwrap_or(base.chain.joint_limit());

    let spines_per_module = r
        .count("interface", "spines_per_module")
        .unwrap_or(base.interface.spines_per_module());
    let spine_angle = r
        .float("interface", "spine_angle_deg")
        .unwrap_or(base.interface.inclination_deg());

    let kind = r.string("target", "kind");
    let diameter = r.float("target", "diameter_m");
    let default_asperity = AsperityModel::default();
    let base_friction = r
        .float("target", "base_friction")
        .unwrap_or(default_asperity.base_friction());
    let (default_min, default_max) = default_asperity.slope().support();
    let slope_min = r.float("target", "slope_min_deg").map(f64::to_radians);
    let slope_max = r
        .float("target", "slope_max_deg")
        .map(f64::to_radians)
        .unwrap_or(default_max);
    let slope_mean = r.float("target", "slope_mean_deg").map(f64::to_radians);
    let slope_sd = r.float("target", "slope_sd_deg").map(f64::to_radians);
    let slope = match r.string("target", "slope_distribution").unwrap_or("uniform") {
        "uniform" => Some(SlopeDistribution::Uniform {
            min: slope_min.unwrap_or(default_min),
            max: slope_max,
        }),
        "truncated_normal" => match (slope_mean, slope_sd) {
            (Some(mean), Some(sd)) => Some(SlopeDistribution::TruncatedNormal {
                mean,
                sd,
                max: slope_max,
            }),
            _ => {
                r.errors.push(
                    "slope_distribution = \"truncated_normal\" needs `slope_mean_deg` and `slope_sd_deg` in [target]"
                        .into(),
                );
                None
            }
        },
        other => {
            r.errors.push(format!(
                "`slope_distribution` in [target] must be \"uniform\" or \"truncated_normal\" (got \"{other}\")"
            ));
            None
        }
    };
    let rock_seed = r.seed("target", "rock_seed");
    let roughness = r.float("target", "roughness_m");
    let correlation = r.float("target", "correlation_m");

    let da = base.actuator;
    let [lo, hi] = da.anchors();
    let anchors = [
        TorqueAnchor {
            current: r.float("actuator", "low_current_a").unwrap_or(lo.current),
            torque: r.float("actuator", "low_torque_nm").unwrap_or(lo.torque),
        },
        TorqueAnchor {
            current: r.float("actuator", "high_current_a").unwrap_or(hi.current),
            torque: r.float("actuator", "high_torque_nm").unwrap_or(hi.torque),
        },
    ];
    let pitch = r.float("actuator", "pitch_m").unwrap_or(da.pitch());
    let efficiency = r.float("actuator", "efficiency").unwrap_or(da.efficiency());
    let desync = r
        .float("actuator", "desync_stiffness_n_per_m")
        .unwrap_or(da.desync_stiffness());
    let travel = r
        .float("actuator", "max_plate_travel_m")
        .unwrap_or(da.max_plate_travel());
    let preload = r.float("actuator", "preload_n").unwrap_or(da.preload());

    let relatch = RelatchWindow {
        low: r.float("relatch", "low_n").unwrap_or(base.relatch.low),
        high: r.float("relatch", "high_n").unwrap_or(base.relatch.high),
        floor: r.float("relatch", "floor").unwrap_or(base.relatch.floor),
        rolloff: r.float("relatch", "rolloff_n").unwrap_or(base.relatch.rolloff),
    };

    let sweep_reps = r.count("sweep", "reps");
    if sweep_reps == Some(0) {
        r.errors.push("`reps` in [sweep] must be >= 1".into());
    }
    let angles = r.floats("sweep", "angles_deg");
    let angles = non_empty(&mut r, "sweep", "angles_deg", angles);
    let currents = r.floats("sweep", "currents_a");
    let currents = non_empty(&mut r, "sweep", "currents_a", currents);
    let diameters = r.floats("sweep", "target_diameters_m");
    let diameters = non_empty(&mut r, "sweep", "target_diameters_m", diameters);
    let spine_angles = r.floats("sweep", "spine_angles_deg");
    let spine_angles = non_empty(&mut r, "sweep", "spine_angles_deg", spine_angles);
    let spine_counts = r.counts("sweep", "spines_per_module");
    if spine_counts.as_ref().is_some_and(Vec::is_empty) {
        r.errors.push("`spines_per_module` in [sweep] must not be empty".into());
    }
    let sweep = SweepAxes {
        reps: sweep_reps,
        angles_deg: angles,
        currents_a: currents,
        target_diameters_m: diameters,
        spine_angles_deg: spine_angles,
        spines_per_module: spine_counts,
    };

    let standard = CurrentGrid::standard();
    let calibration_reps = r.count("calibration", "reps").unwrap_or(DEFAULT_CALIBRATION_REPS);
    if calibration_reps == 0 {
        r.errors.push("`reps` in [calibration] must be >= 1".into());
    }
    let grid = CurrentGrid {
        currents: r.floats("calibration", "currents_a").unwrap_or(standard.currents),
        best_currents: r
            .floats("calibration", "best_currents_a")
            .unwrap_or(standard.best_currents),
    };
    let window_axes = [
        r.floats("calibration", "low_n"),
        r.floats("calibration", "high_n"),
        r.floats("calibration", "floor"),
        r.floats("calibration", "rolloff_n"),
    ];
    let candidates = if window_axes.iter().all(Option::is_none) {
        default_candidates()
    } else if let [Some(lows), Some(highs), Some(floors), Some(rolloffs)] = &window_axes {
        spinegrip_core::sim::candidate_windows(lows, highs, floors, rolloffs)
    } else {
        r.errors
            .push("[calibration] needs all of `low_n`, `high_n`, `floor`, `rolloff_n` or none of them".into());
        Vec::new()
    };

    let chain = r.check(
        "[finger]",
        PhalanxChain::new(lengths, pulley_radius, opening, joint_limit),
    );
    let interface = r.check("[interface]", SpineInterface::new(spines_per_module, spine_angle));
    let asperity = slope.and_then(|s| r.check("[target]", AsperityModel::new(base_friction, s)));
    let a = asperity.unwrap_or_default();
    let target = match (kind, diameter) {
        (Some("sphere"), Some(d)) => r.check("[target]", TargetSurface::sphere(d, a)),
        (Some("rock"), Some(d)) => {
            let rock = make_rock(
                rock_seed.unwrap_or(seed),
                d,
                roughness.unwrap_or(0.1 * d),
                correlation.unwrap_or(0.5 * d),
            );
            r.check("[target]", rock).map(|t| t.with_asperity(a))
        }
        (Some(other), _) if other != "sphere" && other != "rock" => {
            r.errors.push(format!(
                "`kind` in [target] must be \"sphere\" or \"rock\" (got \"{other}\")"
            ));
            None
        }
        _ => None,
    }
    .filter(|_| asperity.is_some());
    let actuator = r.check(
        "[actuator]",
        ActuatorModel::new(anchors, pitch, efficiency, desync, travel, preload),
    );

    let (Some(chain), Some(interface), Some(target), Some(actuator)) = (chain, interface, target, actuator) else {
        return Err(r.errors);
    };
    let scenario = GraspScenario {
        chain,
        finger_azimuths_deg,
        standoff,
        interface,
        target,
        pull_angle_deg,
        pull_azimuth_deg,
        current,
        actuator,
        ramp_rate,
        force_step,
        force_cap,
        max_steps,
        seed,
        mode,
        relatch,
    };
    r.check("[scenario]", scenario.validate());
    if !r.errors.is_empty() {
        return Err(r.errors);
    }
    Ok(ScenarioConfig {
        id,
        reps,
        scenario,
        sweep,
        calibration: CalibrationSpec {
            reps: calibration_reps,
            grid,
            candidates,
        },
    })
}
