//! Core swarm domain types, parameter validation, and deterministic initialization.
//!
//! A swarm is one central drone pinned at the origin plus `k` peripheral
//! drones. All drones start co-located at the origin; peripherals get a small
//! seeded jitter offset so the first repulsion evaluation is well defined.

use crate::error::{Error, Result};
use crate::vec3::Vec3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DroneRole {
    Central,
    Peripheral,
}

impl DroneRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            DroneRole::Central => "central",
            DroneRole::Peripheral => "peripheral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub id: u32,
    pub role: DroneRole,
    /// Position in meters.
    pub position: Vec3,
    /// Displacement applied on the most recent step, meters/step.
    pub velocity: Vec3,
}

/// All tunables of a simulation run.
///
/// `r_gain` is the repulsion gain; it is normally derived from the
/// compactness parameter `cp` (see [`crate::forces::cp_to_gains`]) but can be
/// set directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams {
    /// Attraction gain, dimensionless.
    pub a: f64,
    /// Repulsion gain, m^2/step.
    pub r_gain: f64,
    /// Compactness parameter; controls steady-state spacing.
    pub cp: f64,
    /// Transmission range, m.
    pub r_t: f64,
    /// Collision range, m. Violations are counted, never enforced.
    pub r_c: f64,
    /// Observation (sensing) range per drone, m.
    pub c_obs: f64,
    /// Per-component repulsion singularity guard, m.
    pub epsilon: f64,
    /// Per-step displacement clamp, m.
    pub v_max: f64,
    /// Initialization symmetry-breaking radius, m.
    pub jitter_radius: f64,
    /// RNG seed for initialization.
    pub seed: u64,
    /// Steady-state movement threshold, m.
    pub ss_threshold: f64,
    /// Consecutive steps below threshold required for steady state.
    pub ss_window: u32,
    /// Simulation step budget.
    pub max_steps: u32,
}

pub const DEFAULT_BASE_A: f64 = 0.05;
pub const DEFAULT_R_T: f64 = 80.0;

impl Default for SwarmParams {
    fn default() -> Self {
        SwarmParams::for_cp(40.0)
    }
}

impl SwarmParams {
    /// Defaults with gains derived from the compactness parameter.
    pub fn for_cp(cp: f64) -> Self {
        let r_gain = crate::forces::r_gain_for_cp(cp, DEFAULT_BASE_A);
        SwarmParams {
            a: DEFAULT_BASE_A,
            r_gain,
            cp,
            r_t: DEFAULT_R_T,
            r_c: 60.0,
            c_obs: 40.0,
            epsilon: 0.1,
            v_max: DEFAULT_R_T / 4.0,
            jitter_radius: 0.5,
            seed: 1,
            ss_threshold: 0.2,
            ss_window: 5,
            max_steps: 2000,
        }
    }
}

/// Checks every `SwarmParams` invariant; returns one message per violation.
pub fn validate_params(params: &SwarmParams) -> std::result::Result<(), Vec<String>> {
    let mut errors = Vec::new();
    let mut check = |ok: bool, msg: &str| {
        if !ok {
            errors.push(msg.to_string());
        }
    };
    check(params.a > 0.0, "a must be > 0");
    check(params.r_gain > 0.0, "r_gain must be > 0");
    check(params.cp > 0.0, "cp must be > 0");
    check(params.r_t > 0.0, "r_t must be > 0");
    check(params.c_obs > 0.0, "c_obs must be > 0");
    check(params.epsilon > 0.0, "epsilon must be > 0");
    check(params.v_max > 0.0, "v_max must be > 0");
    check(params.jitter_radius > 0.0, "jitter_radius must be > 0");
    check(
        params.jitter_radius < params.r_t / 10.0,
        "jitter_radius must be < r_t/10",
    );
    check(params.ss_threshold > 0.0, "ss_threshold must be > 0");
    check(params.ss_window >= 1, "ss_window must be >= 1");
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Snapshot of the whole swarm at one time step; the unit of synchronous update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub step: u32,
    pub drones: Vec<DroneState>,
}

impl SwarmState {
    /// The unique central drone.
    pub fn central(&self) -> Result<&DroneState> {
        let mut found = None;
        for d in &self.drones {
            if d.role == DroneRole::Central {
                if found.is_some() {
                    return Err(Error::InvalidState("more than one central drone".into()));
                }
                found = Some(d);
            }
        }
        found.ok_or_else(|| Error::InvalidState("no central drone".into()))
    }

    pub fn drone(&self, id: u32) -> Result<&DroneState> {
        self.drones
            .iter()
            .find(|d| d.id == id)
            .ok_or(Error::UnknownDrone(id))
    }

    pub fn peripherals(&self) -> impl Iterator<Item = &DroneState> {
        self.drones.iter().filter(|d| d.role == DroneRole::Peripheral)
    }

    pub fn peripheral_count(&self) -> usize {
        self.peripherals().count()
    }
}

/// Builds the step-0 swarm: drone 0 central at the origin, drones
/// `1..=k_peripheral` peripheral at the origin plus a seeded jitter offset
/// drawn uniformly from the open ball of radius `jitter_radius`.
///
/// Pure function of `(k_peripheral, params)`: identical inputs produce
/// bit-identical states.
pub fn initialize(k_peripheral: usize, params: &SwarmParams) -> Result<SwarmState> {
    validate_params(params).map_err(Error::InvalidParams)?;
    if k_peripheral == 0 {
        return Err(Error::DegenerateSwarm);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut drones = Vec::with_capacity(k_peripheral + 1);
    drones.push(DroneState {
        id: 0,
        role: DroneRole::Central,
        position: Vec3::ZERO,
        velocity: Vec3::ZERO,
    });

    for id in 1..=k_peripheral as u32 {
        let position = loop {
            let p = sample_in_ball(&mut rng, params.jitter_radius);
            // Coincident peripherals would leave the repulsion term undefined
            // forever on the shared axes; re-draw (probability-0 event).
            if !drones.iter().any(|d: &DroneState| d.position == p) {
                break p;
            }
        };
        drones.push(DroneState {
            id,
            role: DroneRole::Peripheral,
            position,
            velocity: Vec3::ZERO,
        });
    }

    Ok(SwarmState { step: 0, drones })
}

/// Uniform draw from the open ball of the given radius (rejection from the cube).
fn sample_in_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-radius..radius),
            rng.gen_range(-radius..radius),
            rng.gen_range(-radius..radius),
        );
        if v.norm() < radius {
            return v;
        }
    }
}
