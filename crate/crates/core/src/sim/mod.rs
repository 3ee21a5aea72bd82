//! Quasi-static detachment simulation and the studies built on it.

mod calibrate;
mod detach;
mod load;
mod mission;
mod stats;

pub use calibrate::{
    argmax_current, calibrate_relatch, calibrate_relatch_with, candidate_windows, default_candidates, grid_scenarios,
    CalibrationResult, CurrentGrid, CurrentPoint, DEFAULT_CALIBRATION_REPS,
};
pub use detach::{simulate_detachment, summarize_run, DetachmentTrace, RunSummary, SlipEvent, TraceSample};
pub use load::{distribute_load, finger_radial, unit_share, LoadShare, PullDirection};
pub use mission::{margin_in_sigma, required_grip_force, Body};
pub use stats::{mean_std, monte_carlo, CellKey, CellStats, SweepStats};

use serde::{Deserialize, Serialize};

use crate::actuation::ActuatorModel;
use crate::finger::PhalanxChain;
use crate::spine::{AsperityModel, HoldingMode, RelatchWindow, SpineInterface};
use crate::target::TargetSurface;
use crate::{Error, Result};

/// Re-latch window produced by `calibrate_relatch` over
/// [`default_candidates`] on the default scenario (D2 sphere, axial pull)
/// with 0.15..=0.275 A and [`DEFAULT_CALIBRATION_REPS`] repetitions.
pub const DEFAULT_RELATCH: RelatchWindow = RelatchWindow {
    low: 40.0,
    high: 65.0,
    floor: 0.0,
    rolloff: 2.0,
};

/// Everything one simulated pull-off test needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspScenario {
    pub chain: PhalanxChain,
    pub finger_azimuths_deg: Vec<f64>,
    /// Arc length from the target pole to the first phalanx (palm footprint).
    pub standoff: f64,
    pub interface: SpineInterface,
    pub target: TargetSurface,
    pub pull_angle_deg: f64,
    pub pull_azimuth_deg: f64,
    pub current: f64,
    pub actuator: ActuatorModel,
    /// Pull ramp rate (N/s).
    pub ramp_rate: f64,
    /// Force increment per step (N).
    pub force_step: f64,
    /// The pull stops here; a gripper still attached is reported as holding.
    pub force_cap: f64,
    pub max_steps: usize,
    pub seed: u64,
    pub mode: HoldingMode,
    pub relatch: RelatchWindow,
}

impl Default for GraspScenario {
    fn default() -> Self {
        Self {
            chain: PhalanxChain::default(),
            finger_azimuths_deg: vec![0.0, 90.0, 180.0, 270.0],
            standoff: 0.01,
            interface: SpineInterface::default(),
            target: TargetSurface::sphere(0.27, AsperityModel::default()).expect("valid diameter"),
            pull_angle_deg: 0.0,
            pull_azimuth_deg: 0.0,
            current: 0.25,
            actuator: ActuatorModel::default(),
            ramp_rate: 1.0,
            force_step: 0.1,
            force_cap: 1000.0,
            max_steps: 100_000,
            seed: 0,
            mode: HoldingMode::ConsistentUnits,
            relatch: DEFAULT_RELATCH,
        }
    }
}

impl GraspScenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=90.0).contains(&self.pull_angle_deg) {
            return Err(Error::Invariant(format!(
                "pull angle must lie in [0°, 90°] (got {}°)",
                self.pull_angle_deg
            )));
        }
        if self.finger_azimuths_deg.len() < 2 {
            return Err(Error::Invariant(format!(
                "a gripper needs at least 2 fingers (got {})",
                self.finger_azimuths_deg.len()
            )));
        }
        if !(self.ramp_rate > 0.0) {
            return Err(Error::Invariant(format!(
                "ramp rate must be > 0 (got {} N/s)",
                self.ramp_rate
            )));
        }
        if !(self.force_step > 0.0) {
            return Err(Error::Invariant(format!(
                "force step must be > 0 (got {} N)",
                self.force_step
            )));
        }
        if !(self.force_cap > 0.0) {
            return Err(Error::Invariant(format!(
                "force cap must be > 0 (got {} N)",
                self.force_cap
            )));
        }
        if !(self.standoff >= 0.0) {
            return Err(Error::Invariant(format!(
                "standoff must be >= 0 (got {} m)",
                self.standoff
            )));
        }
        self.relatch.validate()
    }

    pub fn pull(&self) -> PullDirection {
        PullDirection::new(self.pull_angle_deg, self.pull_azimuth_deg)
    }
}
