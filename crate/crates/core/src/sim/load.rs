//! Quasi-static sharing of the pull between fingers.
//!
//! Each finger can push back on the gripper along two directions: along
//! the gripper axis (`+z`, resisting pull-off) and laterally towards the
//! side opposite its own azimuth (the finger wraps that side of the target,
//! so a pull away from it presses it into the surface). A finger's force is
//! a non-negative combination of the two, and among all combinations whose
//! sum balances the pull the one with the smallest sum of squares is taken.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::nnls::{min_norm_nonneg, nnls};
use crate::{Error, Result};

/// Pull direction: `angle_deg` from the gripper axis (0 = straight off the
/// target, 90 = tangential) towards azimuth `azimuth_deg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullDirection {
    pub angle_deg: f64,
    pub azimuth_deg: f64,
}

impl PullDirection {
    pub fn new(angle_deg: f64, azimuth_deg: f64) -> Self {
        Self { angle_deg, azimuth_deg }
    }

    pub fn unit(&self) -> Vector3<f64> {
        let (t, a) = (self.angle_deg.to_radians(), self.azimuth_deg.to_radians());
        Vector3::new(t.sin() * a.cos(), t.sin() * a.sin(), t.cos())
    }
}

/// Outward radial unit vector of a finger at `azimuth_deg`.
pub fn finger_radial(azimuth_deg: f64) -> Vector3<f64> {
    let a = azimuth_deg.to_radians();
    Vector3::new(a.cos(), a.sin(), 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadShare {
    /// Whether the fingers can balance the pull.
    pub feasible: bool,
    /// Force each finger transmits to the target (N).
    pub finger_forces: Vec<Vector3<f64>>,
    /// Component of each finger force along the pull; sums to the applied
    /// force when feasible.
    pub resolved: Vec<f64>,
    /// Part of the pull left unbalanced (N); zero when feasible.
    pub unresisted: f64,
    /// Most loaded finger of an infeasible share.
    pub critical_finger: Option<usize>,
}

impl LoadShare {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.finger_forces.iter().map(|g| g.norm()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            feasible: self.feasible,
            finger_forces: self.finger_forces.iter().map(|g| g * factor).collect(),
            resolved: self.resolved.iter().map(|r| r * factor).collect(),
            unresisted: self.unresisted * factor,
            critical_finger: self.critical_finger,
        }
    }
}

fn generator_matrix(finger_azimuths_deg: &[f64]) -> DMatrix<f64> {
    let k = finger_azimuths_deg.len();
    let mut a = DMatrix::zeros(3, 2 * k);
    for (i, &az) in finger_azimuths_deg.iter().enumerate() {
        let lateral = -finger_radial(az);
        a[(2, 2 * i)] = 1.0;
        a[(0, 2 * i + 1)] = lateral.x;
        a[(1, 2 * i + 1)] = lateral.y;
    }
    a
}

/// Splits a pull of `total_force` newtons between fingers at the given
/// azimuths.
pub fn distribute_load(total_force: f64, pull: PullDirection, finger_azimuths_deg: &[f64]) -> Result<LoadShare> {
    if !(total_force >= 0.0) {
        return Err(Error::Domain(format!(
            "applied force must be >= 0 (got {total_force} N)"
        )));
    }
    Ok(unit_share(pull, finger_azimuths_deg).scaled(total_force))
}

/// Load share for a unit pull. Shares are linear in the applied force, so
/// the simulator computes this once per set of attached fingers.
pub fn unit_share(pull: PullDirection, finger_azimuths_deg: &[f64]) -> LoadShare {
    let k = finger_azimuths_deg.len();
    let d = pull.unit();
    if k == 0 {
        return LoadShare {
            feasible: false,
            finger_forces: Vec::new(),
            resolved: Vec::new(),
            unresisted: 1.0,
            critical_finger: None,
        };
    }
    let a = generator_matrix(finger_azimuths_deg);
    let b = DVector::from_column_slice(d.as_slice());
    let (x, feasible) = match min_norm_nonneg(&a, &b) {
        Some(x) => (x, true),
        None => (nnls(&a, &b), false),
    };
    let finger_forces: Vec<Vector3<f64>> = (0..k)
        .map(|i| {
            let lateral = -finger_radial(finger_azimuths_deg[i]);
            Vector3::z() * x[2 * i] + lateral * x[2 * i + 1]
        })
        .collect();
    let resolved = finger_forces.iter().map(|g| g.dot(&d)).collect();
    let unresisted = if feasible { 0.0 } else { (&a * &x - &b).norm() };
    let critical_finger = (!feasible)
        .then(|| {
            finger_forces
                .iter()
                .enumerate()
                .max_by(|(_, p), (_, q)| p.norm().total_cmp(&q.norm()))
                .map(|(i, _)| i)
        })
        .flatten();
    LoadShare {
        feasible,
        finger_forces,
        resolved,
        unresisted,
        critical_finger,
    }
}
