//! Grasp mechanics for a tendon-driven, microspine-equipped soft gripper.
//!
//! The crate is split along the physical chain of the gripper:
//!
//! - [`finger`]: tendon torque, per-phalanx line pressure and wrap kinematics.
//! - [`spine`]: spine/asperity friction, slip checks and asperity sampling.
//! - [`target`]: spherical and procedurally rough targets.
//! - [`actuation`]: motor current to tether tension through the ball screw
//!   and the per-finger desync springs.
//! - [`sim`]: the quasi-static detachment engine, Monte Carlo statistics,
//!   mission load estimation and re-latch calibration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuation;
pub mod error;
pub mod finger;
pub mod nnls;
pub mod sim;
pub mod spine;
pub mod target;

pub use error::{Error, Result};
