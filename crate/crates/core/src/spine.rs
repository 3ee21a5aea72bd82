//! Microspine / asperity contact.
//!
//! An asperity is a triangular bump of slope `β`. A spine latched behind it
//! sees the amplified friction coefficient
//!
//! ```text
//! μ' = (μ + tan β) / (1 − μ tan β)
//! ```
//!
//! and holds until the detachment force it carries reaches
//! `μ' · (n cos β + t sin β) · sin(α + β)`, where `n` and `t` are the normal
//! and tangential loads pressing it into the surface and `α` is the local
//! slope relative to the pull.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Holding force used in simulation for a spine on a self-locking asperity.
pub const SELF_LOCK_CAP: f64 = 1e4;

/// Distribution of asperity slopes `β` (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlopeDistribution {
    Uniform {
        min: f64,
        max: f64,
    },
    /// Normal(mean, sd) restricted to `[0, max]`.
    TruncatedNormal {
        mean: f64,
        sd: f64,
        max: f64,
    },
}

impl SlopeDistribution {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            SlopeDistribution::Uniform { min, max } => (min, max),
            SlopeDistribution::TruncatedNormal { max, .. } => (0.0, max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsperityModel {
    base_friction: f64,
    slope: SlopeDistribution,
}

impl AsperityModel {
    pub fn new(base_friction: f64, slope: SlopeDistribution) -> Result<Self> {
        if !(base_friction.is_finite() && base_friction > 0.0) {
            return Err(Error::Invariant(format!(
                "base friction must be > 0 (got {base_friction})"
            )));
        }
        let (lo, hi) = slope.support();
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Invariant(format!(
                "asperity slope support [{lo}, {hi}] rad must satisfy 0 <= min <= max"
            )));
        }
        let lock = (1.0 / base_friction).atan();
        if hi >= lock {
            return Err(Error::Invariant(format!(
                "maximum asperity slope {:.3}° must be below atan(1/mu) = {:.3}°",
                hi.to_degrees(),
                lock.to_degrees()
            )));
        }
        if let SlopeDistribution::TruncatedNormal { sd, mean, .. } = slope {
            if !(sd > 0.0 && mean.is_finite()) {
                return Err(Error::Invariant(format!(
                    "truncated normal needs sd > 0 and finite mean (got sd = {sd}, mean = {mean})"
                )));
            }
        }
        Ok(Self { base_friction, slope })
    }

    pub fn base_friction(&self) -> f64 {
        self.base_friction
    }

    pub fn slope(&self) -> SlopeDistribution {
        self.slope
    }
}

impl Default for AsperityModel {
    /// Coarse sandpaper stand-in: μ = 0.4, β ~ uniform[0°, 40°].
    fn default() -> Self {
        Self {
            base_friction: 0.4,
            slope: SlopeDistribution::Uniform {
                min: 0.0,
                max: 40f64.to_radians(),
            },
        }
    }
}

/// Spine count per phalanx module and mounting inclination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineInterface {
    spines_per_module: usize,
    inclination_deg: f64,
}

impl SpineInterface {
    pub fn new(spines_per_module: usize, inclination_deg: f64) -> Result<Self> {
        if spines_per_module == 0 {
            return Err(Error::Invariant("spines per module must be >= 1".into()));
        }
        if !(inclination_deg > 0.0 && inclination_deg < 90.0) {
            return Err(Error::Invariant(format!(
                "spine inclination must lie in (0°, 90°) (got {inclination_deg}°)"
            )));
        }
        Ok(Self {
            spines_per_module,
            inclination_deg,
        })
    }

    pub fn spines_per_module(&self) -> usize {
        self.spines_per_module
    }

    pub fn inclination_deg(&self) -> f64 {
        self.inclination_deg
    }

    /// Shallowest asperity this spine can hook: `max(0, 45° − ψ)`.
    pub fn min_engage_slope(&self) -> f64 {
        (45.0 - self.inclination_deg).max(0.0).to_radians()
    }

    pub fn engages(&self, beta: f64) -> bool {
        beta >= self.min_engage_slope()
    }
}

impl Default for SpineInterface {
    fn default() -> Self {
        Self {
            spines_per_module: 2,
            inclination_deg: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpineState {
    pub engaged: bool,
    pub beta: f64,
    pub normal_load: f64,
    pub tangential_load: f64,
}

/// How the two load terms of the spine holding force are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldingMode {
    /// Normal term `r·T / L_j` and tangential term `T / n_a`, exactly as the
    /// closed-form expression is usually printed. The normal term is a line
    /// pressure (N/m), so the sum mixes units.
    Literal,
    /// Normal term from [`crate::finger::per_spine_normal`] (N), tangential
    /// term `T / n_a` (N).
    #[default]
    ConsistentUnits,
}

/// Amplified friction coefficient of a spine latched on an asperity of slope
/// `beta`.
pub fn effective_friction(mu: f64, beta: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("friction coefficient must be > 0 (got {mu})")));
    }
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("asperity slope must be >= 0 (got {beta})")));
    }
    let tb = beta.tan();
    let lock = mu * tb;
    // tan is negative past 90°, which is also a locked asperity
    if lock >= 1.0 - 1e-12 || tb < 0.0 {
        return Err(Error::SelfLocking(lock));
    }
    Ok((mu + tb) / (1.0 - lock))
}

/// Reaction force `n cos β + t sin β` pressing a spine into its asperity.
pub fn reaction_force(normal: f64, tangential: f64, beta: f64) -> f64 {
    normal * beta.cos() + tangential * beta.sin()
}

/// Largest detachment force a single spine holds.
pub fn spine_holding_force(mu: f64, alpha: f64, beta: f64, normal_term: f64, tangential_term: f64) -> Result<f64> {
    let mu_eff = effective_friction(mu, beta)?;
    Ok(mu_eff * reaction_force(normal_term, tangential_term, beta) * (alpha + beta).sin())
}

/// [`spine_holding_force`] with self-locking asperities capped at
/// [`SELF_LOCK_CAP`].
pub fn capped_holding_force(mu: f64, alpha: f64, beta: f64, normal_term: f64, tangential_term: f64) -> f64 {
    match spine_holding_force(mu, alpha, beta, normal_term, tangential_term) {
        Ok(f) => f.min(SELF_LOCK_CAP),
        Err(_) => SELF_LOCK_CAP,
    }
}

/// Normal and tangential load terms for one spine.
///
/// `pressure` is the phalanx line pressure (N/m), `spines_on_phalanx` the
/// spines of that phalanx touching the target and `spines_on_finger` the
/// finger's total `n_a`.
#[allow(clippy::too_many_arguments)]
pub fn load_terms(
    mode: HoldingMode,
    pulley_radius: f64,
    tension: f64,
    moment_sum: f64,
    pressure: f64,
    phalanx_length: f64,
    spines_on_phalanx: usize,
    spines_on_finger: usize,
) -> Result<(f64, f64)> {
    if spines_on_finger == 0 {
        return Err(Error::Domain("finger has no spines in contact".into()));
    }
    let tangential = tension / spines_on_finger as f64;
    let normal = match mode {
        HoldingMode::Literal => pulley_radius * tension / moment_sum,
        HoldingMode::ConsistentUnits => crate::finger::per_spine_normal(pressure, phalanx_length, spines_on_phalanx)?,
    };
    Ok((normal, tangential))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlipOutcome {
    Holds,
    Slips,
}

/// A spine holds only while the applied force stays strictly below its
/// holding force.
pub fn slip_check(applied: f64, holding: f64) -> SlipOutcome {
    if applied < holding {
        SlipOutcome::Holds
    } else {
        SlipOutcome::Slips
    }
}

/// Draws an asperity slope from the model; always inside the support.
pub fn sample_asperity<R: Rng + ?Sized>(model: &AsperityModel, rng: &mut R) -> f64 {
    match model.slope {
        SlopeDistribution::Uniform { min, max } => {
            if max > min {
                rng.random_range(min..=max)
            } else {
                min
            }
        }
        SlopeDistribution::TruncatedNormal { mean, sd, max } => {
            let normal = Normal::new(mean, sd).expect("validated sd > 0");
            for _ in 0..10_000 {
                let x = normal.sample(rng);
                if (0.0..=max).contains(&x) {
                    return x;
                }
            }
            // Support carries almost no mass; fall back to its nearest end.
            mean.clamp(0.0, max)
        }
    }
}

/// Tension window over which a slipped spine reliably re-latches.
///
/// Probability is 1 on `[low, high]` and falls linearly to `floor` over
/// `rolloff` newtons on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelatchWindow {
    pub low: f64,
    pub high: f64,
    pub floor: f64,
    pub rolloff: f64,
}

impl RelatchWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.low >= 0.0 && self.low < self.high) {
            return Err(Error::Invariant(format!(
                "relatch window needs 0 <= low < high (got [{}, {}])",
                self.low, self.high
            )));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::Invariant(format!(
                "relatch floor must be in [0, 1] (got {})",
                self.floor
            )));
        }
        if !(self.rolloff >= 0.0) {
            return Err(Error::Invariant(format!(
                "relatch rolloff must be >= 0 (got {})",
                self.rolloff
            )));
        }
        Ok(())
    }

    /// Always re-latches.
    pub fn always() -> Self {
        Self {
            low: 0.0,
            high: f64::MAX,
            floor: 1.0,
            rolloff: 0.0,
        }
    }
}

pub fn relatch_probability(tension: f64, window: &RelatchWindow) -> f64 {
    let distance = if tension < window.low {
        window.low - tension
    } else if tension > window.high {
        tension - window.high
    } else {
        return 1.0;
    };
    if window.rolloff <= 0.0 || distance >= window.rolloff {
        return window.floor;
    }
    1.0 - (1.0 - window.floor) * distance / window.rolloff
}
