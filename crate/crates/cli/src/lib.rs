//! Command-line front end for the gripper simulator.
//!
//! Subcommands: `pressure`, `detach`, `sweep`, `mission`, `calibrate`.
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinegrip_core::spine::HoldingMode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(vec![message.into()])
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Literal,
    Consistent,
}

impl From<ModeArg> for HoldingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => HoldingMode::Literal,
            ModeArg::Consistent => HoldingMode::ConsistentUnits,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinegrip", version, about = "Microspine gripper grasp simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for repetitions and sweep cells (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Spine holding-force formulation; overrides the scenario file.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-phalanx contact pressure of a tendon-driven finger.
    Pressure(PressureArgs),
    /// Pull-off runs of one scenario: per-run traces and a summary.
    Detach(RunArgs),
    /// Monte Carlo sweep over the axes in the scenario's [sweep] table.
    Sweep(RunArgs),
    /// Grip force a climbing robot needs per gripper.
    Mission(MissionArgs),
    /// Fit the re-latch window to the best actuation band.
    Calibrate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Base seed; overrides [scenario] seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Repetitions; overrides the file.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Output directory (detach, calibrate) or CSV file (sweep; stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PressureArgs {
    /// Phalanx count of a uniform finger.
    #[arg(long, default_value_t = 4)]
    pub phalanges: usize,
    /// Phalanx length of a uniform finger (m).
    #[arg(long, default_value_t = 0.03, allow_negative_numbers = true)]
    pub length_m: f64,
    /// Explicit phalanx lengths base to tip (m); overrides the uniform finger.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lengths_m: Option<Vec<f64>>,
    /// Pulley radius (m).
    #[arg(long, default_value_t = 0.005, allow_negative_numbers = true)]
    pub pulley_radius_m: f64,
    /// Tether tension (N).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "torque_nm")]
    pub tension_n: Option<f64>,
    /// Joint torque (N·m); the tension is torque / pulley radius.
    #[arg(long, allow_negative_numbers = true)]
    pub torque_nm: Option<f64>,
    /// CSV file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MissionArgs {
    /// Robot mass (kg).
    #[arg(long)]
    pub mass_kg: f64,
    /// Body name (moon, mars, earth) or gravity in m/s².
    #[arg(long)]
    pub gravity: String,
    /// Legs in stance (3 for a tripod gait).
    #[arg(long, default_value_t = 3)]
    pub stance_legs: usize,
    /// Measured mean gripping force (N), to report the margin.
    #[arg(long, requires = "capability_std_n")]
    pub capability_mean_n: Option<f64>,
    /// Standard deviation of the gripping force (N).
    #[arg(long, requires = "capability_mean_n")]
    pub capability_std_n: Option<f64>,
    /// CSV file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let global = commands::Global {
        workers: cli.workers,
        mode: cli.mode.map(HoldingMode::from),
    };
    match cli.command {
        Command::Pressure(a) => commands::pressure(&a),
        Command::Detach(a) => commands::detach(&a, &global),
        Command::Sweep(a) => commands::sweep(&a, &global),
        Command::Mission(a) => commands::mission(&a),
        Command::Calibrate(a) => commands::calibrate(&a, &global),
    }
}
