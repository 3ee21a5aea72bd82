//! Ramped pull-off of a closed gripper.
//!
//! The pull grows in fixed increments. At every increment the pull is shared
//! between the attached fingers, each finger's share is split evenly over
//! its latched spines and every spine is checked against its holding force.
//! Where a finger's load points into the target, the surface bears the
//! normal part: it adds to the spine's reaction and only the part along the
//! surface has to be held by the spine.
//! Slipping spines draw a new asperity and re-latch with a tension-dependent
//! probability; slips cascade at constant pull until nothing else slips. A
//! finger with no latched spine lets go, and the gripper is off once the
//! remaining fingers cannot balance the pull. Each slip relaxes the pull in
//! proportion to the share of latched spines that slipped.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::load::{unit_share, LoadShare};
use super::GraspScenario;
use crate::actuation::close_to_equilibrium;
use crate::finger::{loaded_pressure_profile, moment_sum, wrap_on_sphere, WrapState};
use crate::spine::{
    capped_holding_force, effective_friction, load_terms, relatch_probability, sample_asperity, slip_check,
    SlipOutcome, SELF_LOCK_CAP,
};
use crate::target::local_slope;
use crate::Result;

/// Slip rounds allowed at one pull level before the gripper is considered
/// to be sliding off.
const MAX_CASCADE_ROUNDS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipEvent {
    pub finger: usize,
    /// 0-based phalanx, base to tip.
    pub phalanx: usize,
    pub spine: usize,
    pub applied_force: f64,
    pub relatched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub time: f64,
    pub applied_force: f64,
    /// Per-finger load resolved along the pull (N); zero for released fingers.
    pub finger_loads: Vec<f64>,
    pub slips: Vec<SlipEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetachmentTrace {
    pub samples: Vec<TraceSample>,
    pub max_force: f64,
    pub first_slip_force: Option<f64>,
    pub detached: bool,
}

/// Outcome of a run without the per-step samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub max_force: f64,
    pub first_slip_force: Option<f64>,
    pub detached: bool,
    pub slip_count: usize,
}

#[derive(Debug, Clone)]
struct Spine {
    phalanx: usize,
    index: usize,
    beta: f64,
    engaged: bool,
    holding: f64,
    /// Fraction of the spine load pushing into the surface, and the extra
    /// holding force it adds per newton of spine load.
    bearing_gain: f64,
    /// Fraction of the spine load acting along the surface.
    shear: f64,
    /// Surface point under the spine's phalanx.
    contact: Vector3<f64>,
}

#[derive(Debug, Clone)]
struct FingerState {
    attached: bool,
    tension: f64,
    normal_terms: Vec<f64>,
    tangential_term: f64,
    spines: Vec<Spine>,
    rng: ChaCha8Rng,
}

impl FingerState {
    fn engaged(&self) -> usize {
        self.spines.iter().filter(|s| s.engaged).count()
    }
}

struct Engine<'a> {
    scenario: &'a GraspScenario,
    fingers: Vec<FingerState>,
    share: LoadShare,
    active: Vec<usize>,
    mu: f64,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a GraspScenario) -> Result<Self> {
        scenario.validate()?;
        let chain = &scenario.chain;
        let target = &scenario.target;
        let wrap = wrap_on_sphere(chain, target.nominal_diameter(), scenario.standoff)?;
        let wraps: Vec<WrapState> = vec![wrap.clone(); scenario.finger_azimuths_deg.len()];
        let closure = close_to_equilibrium(&wraps, chain, &scenario.actuator, scenario.current)?;
        let spines_per_module = scenario.interface.spines_per_module();
        let contacting: Vec<usize> = (0..chain.n()).filter(|&j| wrap.contact_flags[j]).collect();
        let spines_on_finger = contacting.len() * spines_per_module;

        let fingers = scenario
            .finger_azimuths_deg
            .iter()
            .zip(&closure.tensions)
            .enumerate()
            .map(|(i, (&azimuth, &tension))| {
                let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
                rng.set_stream(i as u64);
                let profile = loaded_pressure_profile(chain, tension, &wrap.joint_angles)?;
                let mut normal_terms = vec![0.0; chain.n()];
                let mut tangential_term = 0.0;
                for &j in &contacting {
                    let (normal, tangential) = load_terms(
                        scenario.mode,
                        chain.pulley_radius(),
                        tension,
                        moment_sum(chain.lengths(), j)?,
                        profile.pressures[j],
                        chain.lengths()[j],
                        spines_per_module,
                        spines_on_finger,
                    )?;
                    normal_terms[j] = normal;
                    tangential_term = tangential;
                }
                let az = azimuth.to_radians();
                let mut spines = Vec::with_capacity(spines_on_finger);
                for &j in &contacting {
                    let polar = wrap.contact_polar[j];
                    let dir = Vector3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
                    let contact = target.surface_point(&dir);
                    for index in 0..spines_per_module {
                        let beta = sample_asperity(target.asperity(), &mut rng);
                        spines.push(Spine {
                            phalanx: j,
                            index,
                            beta,
                            engaged: scenario.interface.engages(beta),
                            holding: 0.0,
                            bearing_gain: 0.0,
                            shear: 1.0,
                            contact,
                        });
                    }
                }
                let attached = spines.iter().any(|s| s.engaged);
                Ok(FingerState {
                    attached,
                    tension,
                    normal_terms,
                    tangential_term,
                    spines,
                    rng,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut engine = Self {
            scenario,
            fingers,
            share: unit_share(scenario.pull(), &[]),
            active: Vec::new(),
            mu: target.asperity().base_friction(),
        };
        engine.reshare();
        Ok(engine)
    }

    /// Recomputes the unit load share for the attached fingers and the
    /// holding force of every spine (the slope `α` follows each finger's
    /// load direction).
    fn reshare(&mut self) {
        self.active = (0..self.fingers.len()).filter(|&i| self.fingers[i].attached).collect();
        let azimuths: Vec<f64> = self
            .active
            .iter()
            .map(|&i| self.scenario.finger_azimuths_deg[i])
            .collect();
        self.share = unit_share(self.scenario.pull(), &azimuths);
        for k in 0..self.active.len() {
            let i = self.active[k];
            let direction = self.share.finger_forces[k];
            self.refresh_holding(i, &direction);
        }
    }

    fn refresh_holding(&mut self, finger: usize, direction: &Vector3<f64>) {
        let target = &self.scenario.target;
        let mu = self.mu;
        let f = &mut self.fingers[finger];
        let unit = direction.try_normalize(0.0).unwrap_or_else(Vector3::z);
        for s in f.spines.iter_mut() {
            let alpha = local_slope(target, &s.contact, &unit);
            s.holding = capped_holding_force(mu, alpha, s.beta, f.normal_terms[s.phalanx], f.tangential_term);
            let into = -target.normal(&s.contact).dot(&unit);
            if into > 0.0 && s.holding < SELF_LOCK_CAP {
                let into = into.min(1.0);
                s.shear = (1.0 - into * into).sqrt();
                s.bearing_gain = effective_friction(mu, s.beta)
                    .map(|m| m * s.beta.cos() * (alpha + s.beta).sin() * s.beta.cos() * into)
                    .unwrap_or(0.0);
            } else {
                s.shear = 1.0;
                s.bearing_gain = 0.0;
            }
        }
    }

    fn finger_loads(&self, force: f64) -> Vec<f64> {
        let mut loads = vec![0.0; self.fingers.len()];
        if self.share.feasible {
            for (k, &i) in self.active.iter().enumerate() {
                loads[i] = self.share.resolved[k] * force;
            }
        }
        loads
    }

    /// Runs slip cascades at a constant pull. Returns the slip events and
    /// whether the gripper is still attached.
    fn settle(&mut self, force: f64, events: &mut Vec<SlipEvent>) -> bool {
        for _ in 0..MAX_CASCADE_ROUNDS {
            if !self.share.feasible {
                return false;
            }
            let mut slipped: Vec<(usize, usize)> = Vec::new();
            for (k, &i) in self.active.iter().enumerate() {
                let load = self.share.finger_forces[k].norm() * force;
                if load <= 0.0 {
                    continue;
                }
                let f = &self.fingers[i];
                let per_spine = load / f.engaged() as f64;
                for (s_idx, s) in f.spines.iter().enumerate() {
                    let held = s.holding + s.bearing_gain * per_spine;
                    if s.engaged && slip_check(s.shear * per_spine, held) == SlipOutcome::Slips {
                        slipped.push((i, s_idx));
                    }
                }
            }
            if slipped.is_empty() {
                return true;
            }
            let mut changed = Vec::new();
            for (i, s_idx) in slipped {
                let interface = self.scenario.interface;
                let asperity = *self.scenario.target.asperity();
                let window = self.scenario.relatch;
                let f = &mut self.fingers[i];
                let p = relatch_probability(f.tension, &window);
                let beta = sample_asperity(&asperity, &mut f.rng);
                let lucky = f.rng.random::<f64>() < p;
                let spine = &mut f.spines[s_idx];
                spine.beta = beta;
                spine.engaged = lucky && interface.engages(beta);
                events.push(SlipEvent {
                    finger: i,
                    phalanx: spine.phalanx,
                    spine: spine.index,
                    applied_force: force,
                    relatched: spine.engaged,
                });
                if !changed.contains(&i) {
                    changed.push(i);
                }
            }
            let mut released = false;
            for &i in &changed {
                if self.fingers[i].engaged() == 0 {
                    self.fingers[i].attached = false;
                    released = true;
                }
            }
            if released {
                self.reshare();
            } else {
                for i in changed {
                    if let Some(k) = self.active.iter().position(|&a| a == i) {
                        let direction = self.share.finger_forces[k];
                        self.refresh_holding(i, &direction);
                    }
                }
            }
        }
        false
    }

    fn total_engaged(&self) -> usize {
        self.fingers
            .iter()
            .filter(|f| f.attached)
            .map(FingerState::engaged)
            .sum()
    }

    fn run(mut self, record: bool) -> (DetachmentTrace, usize) {
        let sc = self.scenario;
        let mut samples = Vec::new();
        let mut force = 0.0f64;
        let mut time = 0.0;
        let mut max_force = 0.0f64;
        let mut first_slip = None;
        let mut slip_count = 0;
        let mut detached = !self.share.feasible;

        let mut steps = 0;
        while !detached && steps < sc.max_steps {
            steps += 1;
            let next = (force + sc.force_step).min(sc.force_cap);
            time += (next - force) / sc.ramp_rate;
            force = next;

            let engaged_before = self.total_engaged();
            let mut events = Vec::new();
            let attached = self.settle(force, &mut events);
            if !attached {
                detached = true;
                slip_count += events.len();
                if record {
                    samples.push(TraceSample {
                        time,
                        applied_force: force,
                        finger_loads: vec![0.0; self.fingers.len()],
                        slips: events,
                    });
                }
                if first_slip.is_none() {
                    first_slip = Some(force);
                }
                break;
            }
            max_force = max_force.max(force);
            let n_events = events.len();
            if n_events > 0 && first_slip.is_none() {
                first_slip = Some(force);
            }
            slip_count += n_events;
            if record {
                samples.push(TraceSample {
                    time,
                    applied_force: force,
                    finger_loads: self.finger_loads(force),
                    slips: events,
                });
            }
            if n_events > 0 {
                let fraction = (n_events as f64 / engaged_before.max(1) as f64).min(1.0);
                force *= 1.0 - fraction;
            } else if force >= sc.force_cap {
                break;
            }
        }

        (
            DetachmentTrace {
                samples,
                max_force,
                first_slip_force: first_slip,
                detached,
            },
            slip_count,
        )
    }
}

/// Simulates one pull-off test, recording every force increment.
pub fn simulate_detachment(scenario: &GraspScenario) -> Result<DetachmentTrace> {
    Ok(Engine::new(scenario)?.run(true).0)
}

/// Same run as [`simulate_detachment`] without keeping the samples.
pub fn summarize_run(scenario: &GraspScenario) -> Result<RunSummary> {
    let (trace, slip_count) = Engine::new(scenario)?.run(false);
    Ok(RunSummary {
        seed: scenario.seed,
        max_force: trace.max_force,
        first_slip_force: trace.first_slip_force,
        detached: trace.detached,
        slip_count,
    })
}
