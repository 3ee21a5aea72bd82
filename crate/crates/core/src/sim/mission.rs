//! Per-gripper load budget for a climbing robot.

use crate::{Error, Result};

/// Surface gravity presets (m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Body {
    Moon,
    Mars,
    Earth,
}

impl Body {
    pub const ALL: [Body; 3] = [Body::Moon, Body::Mars, Body::Earth];

    pub fn gravity(self) -> f64 {
        match self {
            Body::Moon => 1.62,
            Body::Mars => 3.71,
            Body::Earth => 9.81,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Body::Moon => "moon",
            Body::Mars => "mars",
            Body::Earth => "earth",
        }
    }

    pub fn from_name(name: &str) -> Option<Body> {
        Body::ALL.into_iter().find(|b| b.name().eq_ignore_ascii_case(name))
    }
}

/// Force each stance gripper must hold when the whole robot hangs from
/// `stance_legs` grippers (ceiling climbing; a tripod gait has 3).
pub fn required_grip_force(mass: f64, gravity: f64, stance_legs: usize) -> Result<f64> {
    if stance_legs == 0 {
        return Err(Error::Domain("stance legs must be >= 1".into()));
    }
    if !(mass >= 0.0 && gravity >= 0.0) {
        return Err(Error::Domain(format!(
            "mass and gravity must be >= 0 (got {mass} kg, {gravity} m/s²)"
        )));
    }
    Ok(mass * gravity / stance_legs as f64)
}

/// How many standard deviations a measured capability sits above the
/// requirement.
pub fn margin_in_sigma(capability_mean: f64, capability_std: f64, required: f64) -> Result<f64> {
    if !(capability_std > 0.0) {
        return Err(Error::Domain(format!(
            "capability standard deviation must be > 0 (got {capability_std})"
        )));
    }
    Ok((capability_mean - required) / capability_std)
}
