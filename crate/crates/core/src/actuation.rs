//! Single-motor drive chain.
//!
//! Motor current maps to screw torque through two calibration anchors; the
//! ball screw turns that into a plate force, and every tether is tied to the
//! plate through its own compression ("desync") spring so a finger that
//! stops on the target lets the plate keep travelling. A finger stopped at
//! displacement `Δz_i` while the plate sits at `Δz` pulls with
//! `T_i = preload + k (Δz − Δz_i)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::finger::{PhalanxChain, WrapState};
use crate::{Error, Result};

/// Force tolerance of the closing equilibrium (N).
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorqueAnchor {
    pub current: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorModel {
    anchors: [TorqueAnchor; 2],
    pitch: f64,
    efficiency: f64,
    desync_stiffness: f64,
    max_plate_travel: f64,
    preload: f64,
}

impl ActuatorModel {
    pub fn new(
        anchors: [TorqueAnchor; 2],
        pitch: f64,
        efficiency: f64,
        desync_stiffness: f64,
        max_plate_travel: f64,
        preload: f64,
    ) -> Result<Self> {
        if anchors[0].current == anchors[1].current {
            return Err(Error::Invariant("torque anchors must have distinct currents".into()));
        }
        if anchors.iter().any(|a| !(a.current >= 0.0 && a.torque >= 0.0)) {
            return Err(Error::Invariant(
                "torque anchors must have non-negative current and torque".into(),
            ));
        }
        if !(pitch > 0.0) {
            return Err(Error::Invariant(format!(
                "ball screw pitch must be > 0 (got {pitch} m)"
            )));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::Invariant(format!(
                "ball screw efficiency must be in (0, 1] (got {efficiency})"
            )));
        }
        if !(desync_stiffness > 0.0) {
            return Err(Error::Invariant(format!(
                "desync spring stiffness must be > 0 (got {desync_stiffness} N/m)"
            )));
        }
        if !(max_plate_travel > 0.0) {
            return Err(Error::Invariant(format!(
                "plate travel must be > 0 (got {max_plate_travel} m)"
            )));
        }
        if !(preload >= 0.0) {
            return Err(Error::Invariant(format!("preload must be >= 0 (got {preload} N)")));
        }
        let mut anchors = anchors;
        anchors.sort_by(|a, b| a.current.total_cmp(&b.current));
        Ok(Self {
            anchors,
            pitch,
            efficiency,
            desync_stiffness,
            max_plate_travel,
            preload,
        })
    }

    pub fn anchors(&self) -> [TorqueAnchor; 2] {
        self.anchors
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn desync_stiffness(&self) -> f64 {
        self.desync_stiffness
    }

    pub fn max_plate_travel(&self) -> f64 {
        self.max_plate_travel
    }

    pub fn preload(&self) -> f64 {
        self.preload
    }
}

impl Default for ActuatorModel {
    /// 0.15 A → 84 mN·m and 0.275 A → 179 mN·m, 1 mm pitch, η = 0.25
    /// (a screw only self-locks below η = 0.5), 1000 N/m desync springs,
    /// 0.5 m of plate travel, no preload.
    fn default() -> Self {
        Self {
            anchors: [
                TorqueAnchor {
                    current: 0.15,
                    torque: 0.084,
                },
                TorqueAnchor {
                    current: 0.275,
                    torque: 0.179,
                },
            ],
            pitch: 0.001,
            efficiency: 0.25,
            desync_stiffness: 1000.0,
            max_plate_travel: 0.5,
            preload: 0.0,
        }
    }
}

/// Screw torque for a motor current: the line through both anchors, floored
/// at zero.
pub fn current_to_torque(current: f64, model: &ActuatorModel) -> Result<f64> {
    let [lo, hi] = model.anchors;
    if !(current >= 0.0) {
        return Err(Error::Domain(format!("motor current must be >= 0 (got {current} A)")));
    }
    if current > 2.0 * hi.current {
        return Err(Error::Domain(format!(
            "motor current {current} A exceeds twice the upper anchor ({} A)",
            2.0 * hi.current
        )));
    }
    let w = (current - lo.current) / (hi.current - lo.current);
    Ok((lo.torque * (1.0 - w) + hi.torque * w).max(0.0))
}

/// Axial force on the pulling plate: `2π η τ / pitch`.
pub fn plate_force(motor_torque: f64, model: &ActuatorModel) -> Result<f64> {
    if !(motor_torque >= 0.0) {
        return Err(Error::Domain(format!(
            "motor torque must be >= 0 (got {motor_torque} N·m)"
        )));
    }
    Ok(TAU * model.efficiency * motor_torque / model.pitch)
}

/// Tension of a tether whose finger stopped at `finger_dz` while the plate
/// reached `plate_dz`.
pub fn desync_tension(k_spring: f64, plate_dz: f64, finger_dz: f64) -> Result<f64> {
    if !(finger_dz >= 0.0) || finger_dz > plate_dz {
        return Err(Error::State(format!(
            "finger displacement {finger_dz} m must lie in [0, plate displacement {plate_dz} m]"
        )));
    }
    Ok(k_spring * (plate_dz - finger_dz))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosureStatus {
    /// Tether tensions balance the plate force.
    Equilibrium,
    /// The plate hit its travel limit before the tensions could balance it.
    TravelLimit,
    /// Never closed.
    Open,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureState {
    pub plate_displacement: f64,
    pub finger_displacements: Vec<f64>,
    /// Plate displacement at which each finger stops on the target.
    pub block_displacements: Vec<f64>,
    pub tensions: Vec<f64>,
    pub motor_torque: f64,
    pub locked: bool,
    pub status: ClosureStatus,
}

impl ClosureState {
    /// Gripper open, nothing under tension.
    pub fn open(n_fingers: usize) -> Self {
        Self {
            plate_displacement: 0.0,
            finger_displacements: vec![0.0; n_fingers],
            block_displacements: vec![0.0; n_fingers],
            tensions: vec![0.0; n_fingers],
            motor_torque: 0.0,
            locked: false,
            status: ClosureStatus::Open,
        }
    }

    pub fn total_tension(&self) -> f64 {
        self.tensions.iter().sum()
    }

    /// One simulation step with the motor unpowered. The screw cannot be
    /// back-driven, so a locked plate keeps its displacement and the
    /// tensions are re-derived from the unchanged kinematics.
    pub fn step_unpowered(&mut self, actuator: &ActuatorModel) {
        self.motor_torque = 0.0;
        if !self.locked {
            return;
        }
        let (fingers, tensions) = finger_tensions(actuator, self.plate_displacement, &self.block_displacements);
        self.finger_displacements = fingers;
        self.tensions = tensions;
    }
}

fn finger_tension(actuator: &ActuatorModel, plate_dz: f64, block: f64) -> (f64, f64) {
    if plate_dz <= block {
        // still free-running: the desync spring is only preloaded
        (plate_dz, actuator.preload)
    } else {
        let spring = desync_tension(actuator.desync_stiffness, plate_dz, block).expect("block < plate displacement");
        (block, actuator.preload + spring)
    }
}

fn finger_tensions(actuator: &ActuatorModel, plate_dz: f64, blocks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    blocks.iter().map(|&b| finger_tension(actuator, plate_dz, b)).unzip()
}

fn total_tension(actuator: &ActuatorModel, plate_dz: f64, blocks: &[f64]) -> f64 {
    blocks.iter().map(|&b| finger_tension(actuator, plate_dz, b).1).sum()
}

/// Plate displacement at which a finger stops: the tether take-up of its
/// wrapped pose.
pub fn block_displacement(chain: &PhalanxChain, wrap: &WrapState) -> f64 {
    chain.tendon_excursion(&wrap.joint_angles)
}

/// Drives the plate until the tether tensions balance the plate force for
/// `current`, by bisection on plate displacement.
pub fn close_to_equilibrium(
    fingers: &[WrapState],
    chain: &PhalanxChain,
    actuator: &ActuatorModel,
    current: f64,
) -> Result<ClosureState> {
    if fingers.is_empty() {
        return Err(Error::Domain("cannot close a gripper with zero fingers".into()));
    }
    let blocks: Vec<f64> = fingers
        .iter()
        .map(|w| block_displacement(chain, w).min(actuator.max_plate_travel))
        .collect();
    close_with_blocks(&blocks, actuator, current)
}

/// [`close_to_equilibrium`] from precomputed per-finger block displacements.
pub fn close_with_blocks(blocks: &[f64], actuator: &ActuatorModel, current: f64) -> Result<ClosureState> {
    if blocks.is_empty() {
        return Err(Error::Domain("cannot close a gripper with zero fingers".into()));
    }
    let torque = current_to_torque(current, actuator)?;
    let target = plate_force(torque, actuator)?;

    let travel = actuator.max_plate_travel;
    let (plate_dz, status) = if total_tension(actuator, 0.0, blocks) >= target {
        (0.0, ClosureStatus::Equilibrium)
    } else if total_tension(actuator, travel, blocks) < target {
        (travel, ClosureStatus::TravelLimit)
    } else {
        let (mut lo, mut hi) = (0.0, travel);
        let mut mid = hi;
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let sum = total_tension(actuator, mid, blocks);
            if (sum - target).abs() <= EQUILIBRIUM_TOLERANCE {
                break;
            }
            if sum < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (mid, ClosureStatus::Equilibrium)
    };

    let (finger_displacements, tensions) = finger_tensions(actuator, plate_dz, blocks);
    Ok(ClosureState {
        plate_displacement: plate_dz,
        finger_displacements,
        block_displacements: blocks.to_vec(),
        tensions,
        motor_torque: torque,
        locked: true,
        status,
    })
}

/// Whether the grasp survives with the motor switched off.
pub fn holds_without_power(state: &ClosureState) -> bool {
    state.locked || state.tensions.iter().all(|t| *t == 0.0)
}
