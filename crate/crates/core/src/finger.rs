//! Tendon-driven finger mechanics.
//!
//! A finger is a chain of phalanges closed by a single tether routed over
//! identical pulleys, one per joint. Every joint therefore sees the same
//! torque `τ = r·T`, and the contact line pressure of each phalanx follows
//! from the moment balance of the distal sub-chain:
//!
//! ```text
//! p_{j+1} = τ / L_j
//! L_j     = Σ_{p=0}^{n-1-j} ( Σ_{m=0}^{p} l_{n-m} ) · l_{n-p}      (L_n = 0)
//! ```
//!
//! Phalanges are numbered `1..=n` from base to tip; `L_j` is indexed `0..=n`.
//! Pressures are line pressures in N/m. Use [`per_spine_normal`] to turn
//! them into per-spine normal forces.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance under which a chord endpoint counts as touching the target.
pub const CONTACT_TOLERANCE: f64 = 1e-4;

/// Geometry and passive stiffness of one finger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhalanxChain {
    lengths: Vec<f64>,
    pulley_radius: f64,
    opening_spring_stiffness: f64,
    joint_limit: f64,
}

impl PhalanxChain {
    /// Builds a chain from per-phalanx lengths (base to tip, meters), pulley
    /// radius (m), opening spring stiffness (N·m/rad) and joint limit (rad).
    pub fn new(lengths: Vec<f64>, pulley_radius: f64, opening_spring_stiffness: f64, joint_limit: f64) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::Invariant("phalanx count must be >= 1".into()));
        }
        if let Some((i, l)) = lengths.iter().enumerate().find(|(_, l)| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Invariant(format!(
                "phalanx length must be > 0 (phalanx {} has length {l} m)",
                i + 1
            )));
        }
        if !(pulley_radius.is_finite() && pulley_radius > 0.0) {
            return Err(Error::Invariant(format!(
                "pulley radius must be > 0 (got {pulley_radius} m)"
            )));
        }
        let shortest = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        if pulley_radius >= shortest / 2.0 {
            return Err(Error::Invariant(format!(
                "pulley radius {pulley_radius} m must be < half the shortest phalanx ({} m)",
                shortest / 2.0
            )));
        }
        if !(opening_spring_stiffness.is_finite() && opening_spring_stiffness >= 0.0) {
            return Err(Error::Invariant(format!(
                "opening spring stiffness must be >= 0 (got {opening_spring_stiffness} N·m/rad)"
            )));
        }
        if !(joint_limit.is_finite() && joint_limit > 0.0) {
            return Err(Error::Invariant(format!(
                "joint limit must be > 0 (got {joint_limit} rad)"
            )));
        }
        Ok(Self {
            lengths,
            pulley_radius,
            opening_spring_stiffness,
            joint_limit,
        })
    }

    /// `n` identical phalanges of length `length`, no opening springs and a
    /// 90° joint limit.
    pub fn uniform(n: usize, length: f64, pulley_radius: f64) -> Result<Self> {
        Self::new(vec![length; n], pulley_radius, 0.0, FRAC_PI_2)
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn pulley_radius(&self) -> f64 {
        self.pulley_radius
    }

    pub fn opening_spring_stiffness(&self) -> f64 {
        self.opening_spring_stiffness
    }

    pub fn joint_limit(&self) -> f64 {
        self.joint_limit
    }

    /// Tether length taken up when the joints sit at `joint_angles`.
    pub fn tendon_excursion(&self, joint_angles: &[f64]) -> f64 {
        self.pulley_radius * joint_angles.iter().sum::<f64>()
    }
}

impl Default for PhalanxChain {
    /// Four 30 mm phalanges, 5 mm pulleys, 0.01 N·m/rad opening springs and
    /// a 90° joint limit.
    fn default() -> Self {
        Self {
            lengths: vec![0.03; 4],
            pulley_radius: 0.005,
            opening_spring_stiffness: 0.01,
            joint_limit: FRAC_PI_2,
        }
    }
}

/// Per-phalanx line pressures (N/m, base to tip) produced by a joint torque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureProfile {
    pub pressures: Vec<f64>,
    pub joint_torque: f64,
}

/// Joint torque produced by the tether over a pulley, `r·T`.
pub fn joint_torque(pulley_radius: f64, tension: f64) -> Result<f64> {
    if !(pulley_radius > 0.0) {
        return Err(Error::Domain(format!(
            "pulley radius must be > 0 (got {pulley_radius})"
        )));
    }
    if !(tension >= 0.0) {
        return Err(Error::Domain(format!(
            "tether tension must be >= 0 (got {tension}); tethers cannot push"
        )));
    }
    Ok(pulley_radius * tension)
}

/// Moment sum `L_j` of the phalanges distal to joint `j`, in m².
pub fn moment_sum(lengths: &[f64], j: usize) -> Result<f64> {
    let n = lengths.len();
    if j > n {
        return Err(Error::Index { index: j, max: n });
    }
    // 1-based l_k lives at lengths[k - 1].
    let l = |k: usize| lengths[k - 1];
    let mut total = 0.0;
    for p in 0..n - j {
        let outer: f64 = (0..=p).map(|m| l(n - m)).sum();
        total += outer * l(n - p);
    }
    Ok(total)
}

/// Line pressure on every phalanx for a tether tension, assuming equal
/// torque at every joint.
pub fn pressure_profile(chain: &PhalanxChain, tension: f64) -> Result<PressureProfile> {
    let tau = joint_torque(chain.pulley_radius, tension)?;
    let pressures = (0..chain.n())
        .map(|j| moment_sum(&chain.lengths, j).map(|lj| tau / lj))
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureProfile {
        pressures,
        joint_torque: tau,
    })
}

/// Like [`pressure_profile`], but each joint's torque is reduced by its
/// opening spring: `τ_j = max(0, r·T − k_open·θ_j)`, and `p_{j+1} = τ_j / L_j`.
pub fn loaded_pressure_profile(chain: &PhalanxChain, tension: f64, joint_angles: &[f64]) -> Result<PressureProfile> {
    if joint_angles.len() != chain.n() {
        return Err(Error::Domain(format!(
            "expected {} joint angles, got {}",
            chain.n(),
            joint_angles.len()
        )));
    }
    let tau = joint_torque(chain.pulley_radius, tension)?;
    let pressures = joint_angles
        .iter()
        .enumerate()
        .map(|(j, theta)| {
            let effective = (tau - chain.opening_spring_stiffness * theta).max(0.0);
            moment_sum(&chain.lengths, j).map(|lj| effective / lj)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureProfile {
        pressures,
        joint_torque: tau,
    })
}

/// Closed form of `τ / L_j` for a chain of `n` equal phalanges of length `l`:
/// `2τ / (l² (n−j)(n+1−j))`.
pub fn equal_length_pressure(tau: f64, l: f64, n: usize, j: usize) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain(format!("phalanx length must be > 0 (got {l})")));
    }
    if n == 0 || j >= n {
        return Err(Error::Index {
            index: j,
            max: n.saturating_sub(1),
        });
    }
    let a = (n - j) as f64;
    Ok(2.0 * tau / (l * l * a * (a + 1.0)))
}

/// Normal force on one spine when a phalanx's line pressure is shared
/// equally by the spines touching the target.
pub fn per_spine_normal(pressure: f64, phalanx_length: f64, spines_in_contact: usize) -> Result<f64> {
    if spines_in_contact == 0 {
        return Err(Error::Domain(
            "no spines in contact: per-spine normal force is undefined".into(),
        ));
    }
    Ok(pressure * phalanx_length / spines_in_contact as f64)
}

/// Finger pose after closing on a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapState {
    /// Flexion per joint (rad); joint `k` sits at the base of phalanx `k+1`.
    pub joint_angles: Vec<f64>,
    pub contact_flags: Vec<bool>,
    /// Arc length from the target pole to each phalanx contact point (m).
    /// Zero for phalanges out of contact.
    pub contact_arcs: Vec<f64>,
    /// Polar angle of each phalanx contact point, measured from the gripper
    /// axis at the target center (rad). Zero for phalanges out of contact.
    pub contact_polar: Vec<f64>,
}

impl WrapState {
    pub fn contact_count(&self) -> usize {
        self.contact_flags.iter().filter(|c| **c).count()
    }
}

/// Wraps a finger around a sphere as a chord polygon.
///
/// The first phalanx starts `standoff` meters of arc away from the pole (the
/// palm footprint). Each contacting phalanx is a chord of the great circle in
/// the finger's plane; joint `k` flexes by the mean of the central angles of
/// its two neighbouring chords (the base joint by the first chord's angle),
/// which for equal phalanges is `2·asin(l/D)`. A joint that would exceed its
/// limit is clamped; that phalanx and every distal one leave the surface and
/// their joints close to the limit.
pub fn wrap_on_sphere(chain: &PhalanxChain, sphere_diameter: f64, standoff: f64) -> Result<WrapState> {
    if !(sphere_diameter > 0.0) {
        return Err(Error::Domain(format!(
            "sphere diameter must be > 0 (got {sphere_diameter})"
        )));
    }
    if !(standoff >= 0.0) {
        return Err(Error::Domain(format!("standoff must be >= 0 (got {standoff})")));
    }
    let n = chain.n();
    let radius = sphere_diameter / 2.0;
    let limit = chain.joint_limit;
    let central: Vec<Option<f64>> = chain
        .lengths
        .iter()
        .map(|&l| (l <= sphere_diameter).then(|| 2.0 * (l / sphere_diameter).asin()))
        .collect();

    let start_polar = standoff / radius;
    let mut joint_angles = vec![limit; n];
    let mut contact_flags = vec![false; n];
    let mut contact_arcs = vec![0.0; n];
    let mut contact_polar = vec![0.0; n];

    // Heading of a segment is the angle ψ with direction (cos ψ, −sin ψ) in
    // the (radial, axial) plane; the surface tangent at polar angle φ has ψ = φ.
    let mut point = (radius * start_polar.sin(), radius * start_polar.cos());
    let mut heading = match central[0] {
        Some(c0) => start_polar - c0 / 2.0,
        None => start_polar,
    };
    let mut previous: Option<f64> = None;
    for k in 0..n {
        let Some(ck) = central[k] else { break };
        let required = match previous {
            None => ck,
            Some(cp) => 0.5 * (cp + ck),
        };
        let flexion = required.min(limit);
        joint_angles[k] = flexion;
        heading += flexion;
        let l = chain.lengths[k];
        let end = (point.0 + l * heading.cos(), point.1 - l * heading.sin());
        let on_surface = |p: (f64, f64)| (p.0.hypot(p.1) - radius).abs() < CONTACT_TOLERANCE;
        let mid = (0.5 * (point.0 + end.0), 0.5 * (point.1 + end.1));
        let mid_polar = mid.0.atan2(mid.1);
        let end_polar = end.0.atan2(end.1);
        let touching = required <= limit
            && on_surface(point)
            && on_surface(end)
            && mid_polar > 0.0
            && end_polar > 0.0
            && end_polar <= std::f64::consts::PI;
        if !touching {
            break;
        }
        contact_flags[k] = true;
        contact_polar[k] = mid_polar;
        contact_arcs[k] = radius * mid_polar;
        point = end;
        previous = Some(ck);
    }
    Ok(WrapState {
        joint_angles,
        contact_flags,
        contact_arcs,
        contact_polar,
    })
}
