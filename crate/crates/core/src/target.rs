//! Grasp targets: the spherical test family and procedurally rough rocks.
//!
//! Targets live in a frame centered on the target with `+z` along the
//! gripper axis, pointing from the target towards the palm. A pull at 0°
//! is along `+z`.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spine::AsperityModel;
use crate::{Error, Result};

const ROCK_MODES: usize = 12;

/// The three target diameters derived from the gripper diameter:
/// half, equal and one and a half times.
pub fn sphere_family(gripper_diameter: f64) -> Result<(f64, f64, f64)> {
    if !(gripper_diameter > 0.0) {
        return Err(Error::Domain(format!(
            "gripper diameter must be > 0 (got {gripper_diameter})"
        )));
    }
    Ok((gripper_diameter / 2.0, gripper_diameter, 1.5 * gripper_diameter))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct RockMode {
    axis: Vector3<f64>,
    wavenumber: f64,
    phase: f64,
    weight: f64,
}

/// Parameters of a rough target; the surface itself is regenerated from
/// the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RockParams {
    pub seed: u64,
    pub amplitude: f64,
    pub correlation_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Sphere {
        diameter: f64,
        asperity: AsperityModel,
    },
    Rock {
        diameter: f64,
        rock: RockParams,
        asperity: AsperityModel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Sphere,
    Rock,
}

/// A rigid target: star-convex radial profile plus its asperity model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetSpec", into = "TargetSpec")]
pub struct TargetSurface {
    nominal_diameter: f64,
    rock: Option<RockParams>,
    #[serde(skip)]
    modes: Vec<RockMode>,
    asperity: AsperityModel,
}

impl TargetSurface {
    pub fn sphere(diameter: f64, asperity: AsperityModel) -> Result<Self> {
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::Invariant(format!(
                "target diameter must be > 0 (got {diameter} m)"
            )));
        }
        Ok(Self {
            nominal_diameter: diameter,
            rock: None,
            modes: Vec::new(),
            asperity,
        })
    }

    pub fn kind(&self) -> TargetKind {
        if self.rock.is_some() {
            TargetKind::Rock
        } else {
            TargetKind::Sphere
        }
    }

    pub fn nominal_diameter(&self) -> f64 {
        self.nominal_diameter
    }

    pub fn asperity(&self) -> &AsperityModel {
        &self.asperity
    }

    pub fn rock_params(&self) -> Option<RockParams> {
        self.rock
    }

    pub fn with_asperity(mut self, asperity: AsperityModel) -> Self {
        self.asperity = asperity;
        self
    }

    /// Surface radius along a direction from the target center.
    pub fn radius(&self, direction: &Vector3<f64>) -> f64 {
        let u = direction.normalize();
        let base = self.nominal_diameter / 2.0;
        let Some(rock) = self.rock else { return base };
        let bump: f64 = self
            .modes
            .iter()
            .map(|m| m.weight * (m.wavenumber * m.axis.dot(&u) + m.phase).cos())
            .sum();
        base + rock.amplitude * bump
    }

    pub fn surface_point(&self, direction: &Vector3<f64>) -> Vector3<f64> {
        let u = direction.normalize();
        u * self.radius(&u)
    }

    /// Outward unit normal of the surface above `direction`.
    pub fn normal(&self, direction: &Vector3<f64>) -> Vector3<f64> {
        let u = direction.normalize();
        let Some(rock) = self.rock else { return u };
        let grad: Vector3<f64> = self
            .modes
            .iter()
            .map(|m| {
                -rock.amplitude * m.weight * m.wavenumber * (m.wavenumber * m.axis.dot(&u) + m.phase).sin() * m.axis
            })
            .sum();
        let tangential = grad - u * grad.dot(&u);
        (u * self.radius(&u) - tangential).normalize()
    }
}

impl From<TargetSurface> for TargetSpec {
    fn from(t: TargetSurface) -> Self {
        match t.rock {
            None => TargetSpec::Sphere {
                diameter: t.nominal_diameter,
                asperity: t.asperity,
            },
            Some(rock) => TargetSpec::Rock {
                diameter: t.nominal_diameter,
                rock,
                asperity: t.asperity,
            },
        }
    }
}

impl TryFrom<TargetSpec> for TargetSurface {
    type Error = Error;

    fn try_from(spec: TargetSpec) -> Result<Self> {
        match spec {
            TargetSpec::Sphere { diameter, asperity } => TargetSurface::sphere(diameter, asperity),
            TargetSpec::Rock {
                diameter,
                rock,
                asperity,
            } => Ok(make_rock(rock.seed, diameter, rock.amplitude, rock.correlation_scale)?.with_asperity(asperity)),
        }
    }
}

/// Builds a rough, star-convex target by perturbing a sphere with a sum of
/// randomized low-order plane-wave modes restricted to the sphere.
///
/// The mode weights sum to one, so the radius never departs from
/// `base_diameter / 2` by more than `roughness_amplitude`. The wavenumbers
/// scale with `base radius / correlation_scale`.
pub fn make_rock(
    seed: u64,
    base_diameter: f64,
    roughness_amplitude: f64,
    correlation_scale: f64,
) -> Result<TargetSurface> {
    let mut target = TargetSurface::sphere(base_diameter, AsperityModel::default())?;
    if !(roughness_amplitude >= 0.0 && roughness_amplitude < base_diameter / 4.0) {
        return Err(Error::Invariant(format!(
            "rock roughness amplitude {roughness_amplitude} m must be in [0, diameter/4 = {} m)",
            base_diameter / 4.0
        )));
    }
    if !(correlation_scale.is_finite() && correlation_scale > 0.0) {
        return Err(Error::Invariant(format!(
            "rock correlation scale must be > 0 (got {correlation_scale} m)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_wavenumber = base_diameter / 2.0 / correlation_scale;
    let mut modes: Vec<RockMode> = (0..ROCK_MODES)
        .map(|_| {
            // uniform direction on the sphere
            let z: f64 = rng.random_range(-1.0..=1.0);
            let azimuth: f64 = rng.random_range(0.0..TAU);
            let s = (1.0 - z * z).sqrt();
            RockMode {
                axis: Vector3::new(s * azimuth.cos(), s * azimuth.sin(), z),
                wavenumber: base_wavenumber * rng.random_range(0.5..1.5),
                phase: rng.random_range(0.0..TAU),
                weight: rng.random_range(0.1..1.0),
            }
        })
        .collect();
    let total: f64 = modes.iter().map(|m| m.weight).sum();
    for m in &mut modes {
        m.weight /= total;
    }
    target.rock = Some(RockParams {
        seed,
        amplitude: roughness_amplitude,
        correlation_scale,
    });
    target.modes = modes;
    Ok(target)
}

/// Local slope `α` at a contact point relative to a pull direction: the
/// angle between the outward surface normal and the pull, in `[0, 90°]`.
/// Pulls tangent to, or into, the surface give 90°.
pub fn local_slope(target: &TargetSurface, contact_point: &Vector3<f64>, pull_direction: &Vector3<f64>) -> f64 {
    let n = target.normal(contact_point);
    let norm = pull_direction.norm();
    if norm == 0.0 {
        return FRAC_PI_2;
    }
    let cos = n.dot(pull_direction) / norm;
    if cos <= 0.0 {
        FRAC_PI_2
    } else {
        cos.min(1.0).acos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;
    use rand::Rng;

    fn sphere(d: f64) -> TargetSurface {
        TargetSurface::sphere(d, AsperityModel::default()).unwrap()
    }

    fn direction(polar: f64, azimuth: f64) -> Vector3<f64> {
        Vector3::new(polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos())
    }

    #[test]
    fn sphere_family_examples() {
        let (d1, d2, d3) = sphere_family(0.270).unwrap();
        assert_relative_eq!(d1, 0.135, max_relative = 1e-15);
        assert_relative_eq!(d2, 0.270, max_relative = 1e-15);
        assert_relative_eq!(d3, 0.405, max_relative = 1e-15);
        assert_relative_eq!(d1 + d3, 2.0 * d2, max_relative = 1e-15);
        assert_eq!(sphere_family(1.0).unwrap(), (0.5, 1.0, 1.5));
        assert!(sphere_family(0.0).is_err());
    }

    #[test]
    fn slope_on_sphere_under_axial_pull() {
        let t = sphere(0.27);
        let axial = Vector3::z();
        let equator = t.surface_point(&direction(FRAC_PI_2, 0.3));
        let pole = t.surface_point(&Vector3::z());
        let mid = t.surface_point(&direction(45f64.to_radians(), 1.0));
        assert_relative_eq!(local_slope(&t, &equator, &axial), FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(local_slope(&t, &pole, &axial), 0.0, epsilon = 1e-7);
        assert_relative_eq!(local_slope(&t, &mid, &axial).to_degrees(), 45.0, epsilon = 1e-9);
        // pulling into the surface
        let below = t.surface_point(&direction(2.0, 0.0));
        assert_eq!(local_slope(&t, &below, &axial), FRAC_PI_2);
    }

    #[test]
    fn flat_rock_is_a_sphere() {
        let rock = make_rock(5, 0.3, 0.0, 0.05).unwrap();
        for k in 0..50 {
            let u = direction(0.1 * k as f64, 0.37 * k as f64);
            assert_eq!(rock.radius(&u), 0.15);
            assert_relative_eq!(rock.normal(&u), u.normalize(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rock_amplitude_limit() {
        assert!(make_rock(1, 0.3, 0.075, 0.05).is_err());
        assert!(make_rock(1, 0.3, 0.07, 0.05).is_ok());
        assert!(make_rock(1, 0.3, 0.01, 0.0).is_err());
    }

    #[test]
    fn rock_is_deterministic_and_bounded() {
        let a = make_rock(42, 0.3, 0.02, 0.04).unwrap();
        let b = make_rock(42, 0.3, 0.02, 0.04).unwrap();
        let c = make_rock(43, 0.3, 0.02, 0.04).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut differs = false;
        for _ in 0..1000 {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..TAU);
            let s = (1.0 - z * z).sqrt();
            let u = Vector3::new(s * phi.cos(), s * phi.sin(), z);
            let r = a.radius(&u);
            assert_eq!(r.to_bits(), b.radius(&u).to_bits());
            assert!((0.15 - 0.02..=0.15 + 0.02).contains(&r));
            differs |= r != c.radius(&u);
        }
        assert!(differs);
    }

    #[test]
    fn rock_normal_matches_finite_differences() {
        let rock = make_rock(8, 0.3, 0.02, 0.05).unwrap();
        let u = direction(0.8, 1.3).normalize();
        let n = rock.normal(&u);
        // two tangent vectors of the surface by central differences
        let e1 = u.cross(&Vector3::x()).normalize();
        let e2 = u.cross(&e1);
        let h = 1e-6;
        let p = |v: Vector3<f64>| rock.surface_point(&v);
        let t1 = (p(u + e1 * h) - p(u - e1 * h)) / (2.0 * h);
        let t2 = (p(u + e2 * h) - p(u - e2 * h)) / (2.0 * h);
        assert!(n.dot(&t1).abs() < 1e-6 * t1.norm());
        assert!(n.dot(&t2).abs() < 1e-6 * t2.norm());
        assert!(n.dot(&u) > 0.0);
    }

    #[test]
    fn target_spec_round_trip() {
        let rock = make_rock(3, 0.2, 0.01, 0.03).unwrap();
        let spec = TargetSpec::from(rock.clone());
        let back = TargetSurface::try_from(spec).unwrap();
        assert_eq!(back, rock);
    }

    proptest! {
        #[test]
        fn slope_is_rotation_invariant(
            polar in 0.0f64..3.1,
            azimuth in 0.0f64..6.2,
            pull_polar in 0.0f64..1.57,
            pull_azimuth in 0.0f64..6.2,
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in -3.0f64..3.0,
        ) {
            prop_assume!(Vector3::from(axis).norm() > 1e-3);
            let t = sphere(0.27);
            let point = t.surface_point(&direction(polar, azimuth));
            let pull = direction(pull_polar, pull_azimuth);
            let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
            let before = local_slope(&t, &point, &pull);
            let after = local_slope(&t, &(rot * point), &(rot * pull));
            prop_assert!((before - after).abs() < 1e-6);
        }

        #[test]
        fn sphere_family_scales_linearly(d in 0.01f64..10.0, k in 0.1f64..10.0) {
            let (a, b, c) = sphere_family(d).unwrap();
            let (ka, kb, kc) = sphere_family(k * d).unwrap();
            prop_assert!(a < b && b < c);
            prop_assert!((ka - k * a).abs() <= 1e-12 * ka);
            prop_assert!((kb - k * b).abs() <= 1e-12 * kb);
            prop_assert!((kc - k * c).abs() <= 1e-12 * kc);
        }

        #[test]
        fn small_roughness_stays_close(amp in 0.0f64..0.01, seed in any::<u64>(), polar in 0.0f64..3.1, az in 0.0f64..6.2) {
            let rock = make_rock(seed, 0.27, amp, 0.05).unwrap();
            let dev = (rock.radius(&direction(polar, az)) - 0.135).abs();
            prop_assert!(dev <= amp);
        }
    }
}
