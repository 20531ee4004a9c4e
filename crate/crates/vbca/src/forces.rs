//! The virtual-forces engine: neighbor discovery, attraction toward the
//! central drone, per-axis inverse-distance repulsion among peripherals, and
//! the synchronous position update.
//!
//! Every drone reads only the previous step's snapshot (Jacobi update), so
//! update order is irrelevant and whole trajectories are reproducible
//! bit-for-bit from the seed.

use crate::error::{Error, Result};
use crate::swarm::{DroneRole, DroneState, SwarmParams, SwarmState};
use crate::topology::{self, StepMetrics};
use crate::vec3::{Axis, Vec3};
use serde::{Deserialize, Serialize};

/// Calibration constant of the cp -> r_gain mapping.
///
/// Fixed once by a sweep over the full (k, cp) grid and then frozen; see
/// `examples/calibrate.rs`. 0.48 places the 3-peripheral swarm at cp = 10
/// inside the 5..8 m hub-distance band (measured 7.4 m) while the spread of
/// distances across k at cp = 70 clears its 20 m floor (measured 21 m) and
/// the largest transient hub distance stays under the 80 m transmission
/// range (measured 76 m).
pub const CP_GAIN_KAPPA: f64 = 0.48;

/// Repulsion gain for a compactness value. Equilibrium spacing scales as
/// `sqrt(r_gain / a)`, so the quadratic mapping makes spacing linear in cp.
pub fn r_gain_for_cp(cp: f64, base_a: f64) -> f64 {
    CP_GAIN_KAPPA * base_a * cp * cp
}

/// Maps the compactness parameter to the force gains `(a, r_gain)`.
pub fn cp_to_gains(cp: f64, base_a: f64) -> Result<(f64, f64)> {
    if cp <= 0.0 {
        return Err(Error::Parameter("cp must be > 0".into()));
    }
    if base_a <= 0.0 {
        return Err(Error::Parameter("base_a must be > 0".into()));
    }
    Ok((base_a, r_gain_for_cp(cp, base_a)))
}

/// Direct neighbors of one drone at one snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub owner: u32,
    /// Neighbor ids sorted ascending; each within `r_t` of the owner.
    pub members: Vec<u32>,
}

/// All drones within transmission range of `id` (closed ball, owner excluded).
pub fn find_direct_neighbors(state: &SwarmState, id: u32, r_t: f64) -> Result<NeighborSet> {
    let owner = state.drone(id)?;
    let mut members: Vec<u32> = state
        .drones
        .iter()
        .filter(|d| d.id != id && d.position.distance(&owner.position) <= r_t)
        .map(|d| d.id)
        .collect();
    members.sort_unstable();
    Ok(NeighborSet { owner: id, members })
}

/// Signed per-axis separation: drone `d`'s coordinate minus drone `n`'s.
pub fn delta(axis: Axis, d: &DroneState, n: &DroneState) -> f64 {
    d.position.component(axis) - n.position.component(axis)
}

/// Attraction term pulling `d` toward the centroid of the given attractor
/// positions (in this system: the single central drone).
pub fn attraction_velocity(d: &DroneState, toward: &[Vec3], a: f64) -> Result<Vec3> {
    if toward.is_empty() {
        return Err(Error::ConnectivityLoss {
            drone: d.id,
            step: None,
        });
    }
    let mut centroid = Vec3::ZERO;
    for p in toward {
        centroid += *p;
    }
    centroid = centroid * (1.0 / toward.len() as f64);
    Ok((centroid - d.position) * a)
}

/// Fraction of the transmission range where the repulsion taper begins.
const TAPER_START: f64 = 0.9;

/// Smoothstep weight switching the repulsion off over the last tenth of the
/// transmission range. Hard truncation at `r_t` would make the force jump by
/// `r_gain / r_t` whenever a pair crosses the range boundary, which keeps the
/// swarm chattering above any movement threshold instead of settling.
fn cutoff_weight(dist: f64, r_t: f64) -> f64 {
    let start = TAPER_START * r_t;
    if dist <= start {
        1.0
    } else if dist >= r_t {
        0.0
    } else {
        let s = (dist - start) / (r_t - start);
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Repulsion term pushing `d` away from each neighbor.
///
/// Each neighbor contributes the inverse-distance kernel
/// `delta / |delta|^2` built from the signed per-axis separations
/// `delta = (dx, dy, dz)`, so the term points away from the neighbor and its
/// magnitude falls off as one over the separation. On each axis this is
/// `dx / (dx^2 + dy^2 + dz^2)`, which reduces to the bare `1/dx` when the
/// pair differs on that axis alone. Neighbors closer than `epsilon` are
/// skipped (singularity guard; initialization jitter keeps exact coincidence
/// from occurring), and contributions fade out smoothly approaching the
/// transmission range `r_t` (see [`cutoff_weight`]).
pub fn repulsion_velocity(
    d: &DroneState,
    neighbors: &[&DroneState],
    r_gain: f64,
    epsilon: f64,
    r_t: f64,
) -> Vec3 {
    let mut sum = Vec3::ZERO;
    for n in neighbors {
        let separation = Vec3::new(
            delta(Axis::X, d, n),
            delta(Axis::Y, d, n),
            delta(Axis::Z, d, n),
        );
        let dist_sq = separation.norm_squared();
        if dist_sq >= epsilon * epsilon {
            let weight = cutoff_weight(dist_sq.sqrt(), r_t);
            if weight > 0.0 {
                sum += separation * (weight / dist_sq);
            }
        }
    }
    sum * r_gain
}

/// One synchronous step: every peripheral drone computes its velocity from
/// the input snapshot and moves; the central drone never moves.
///
/// Fails with `ConnectivityLoss` if any peripheral no longer has the central
/// drone within `r_t`.
pub fn step(state: &SwarmState, params: &SwarmParams) -> Result<SwarmState> {
    let central = state.central()?;
    let central_id = central.id;
    let central_pos = central.position;
    let next_step = state.step + 1;

    let mut drones = Vec::with_capacity(state.drones.len());
    for d in &state.drones {
        if d.role == DroneRole::Central {
            drones.push(DroneState {
                velocity: Vec3::ZERO,
                ..*d
            });
            continue;
        }

        let neighbors = find_direct_neighbors(state, d.id, params.r_t)?;
        if !neighbors.members.contains(&central_id) {
            return Err(Error::ConnectivityLoss {
                drone: d.id,
                step: Some(next_step),
            });
        }

        let attraction = attraction_velocity(d, &[central_pos], params.a)?;
        // Sorted neighbor ids fix the summation order, so the result does not
        // depend on how the drone list happens to be ordered.
        let peripheral_neighbors: Vec<&DroneState> = neighbors
            .members
            .iter()
            .map(|&id| state.drone(id))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|n| n.role == DroneRole::Peripheral)
            .collect();
        let repulsion =
            repulsion_velocity(d, &peripheral_neighbors, params.r_gain, params.epsilon, params.r_t);

        let mut velocity = attraction + repulsion;
        let speed = velocity.norm();
        if speed > params.v_max {
            velocity = velocity * (params.v_max / speed);
        }

        drones.push(DroneState {
            position: d.position + velocity,
            velocity,
            ..*d
        });
    }

    Ok(SwarmState {
        step: next_step,
        drones,
    })
}

/// Full trajectory of a run: every state from step 0 on, per-step metrics,
/// and whether the steady-state predicate fired within the step budget.
#[derive(Debug, Clone)]
pub struct RunTrace {
    pub states: Vec<SwarmState>,
    pub history: Vec<StepMetrics>,
    pub converged: bool,
}

impl RunTrace {
    pub fn final_state(&self) -> &SwarmState {
        self.states.last().expect("trace holds at least the initial state")
    }

    /// Step index at which the quiet window began; total executed steps when
    /// the run never converged.
    pub fn steps_to_steady_state(&self, ss_window: u32) -> u32 {
        let executed = self.history.len() as u32;
        if self.converged {
            executed + 1 - ss_window
        } else {
            executed
        }
    }
}

/// Runs `step` until steady state (per `topology::steady_state_reached`) or
/// until `max_steps` is exhausted, recording every intermediate state.
pub fn run_recording(initial: SwarmState, params: &SwarmParams) -> Result<RunTrace> {
    let mut states = vec![initial];
    let mut history: Vec<StepMetrics> = Vec::new();
    let mut converged = false;

    for _ in 0..params.max_steps {
        let prev = states.last().expect("non-empty");
        let next = step(prev, params)?;
        history.push(step_metrics(prev, &next, params)?);
        states.push(next);
        if topology::steady_state_reached(&history, params.ss_threshold, params.ss_window) {
            converged = true;
            break;
        }
    }

    Ok(RunTrace {
        states,
        history,
        converged,
    })
}

/// Like [`run_recording`] but keeps only the final state.
pub fn run_to_steady_state(
    initial: SwarmState,
    params: &SwarmParams,
) -> Result<(SwarmState, Vec<StepMetrics>, bool)> {
    let trace = run_recording(initial, params)?;
    let RunTrace {
        mut states,
        history,
        converged,
    } = trace;
    let last = states.pop().expect("non-empty");
    Ok((last, history, converged))
}

/// Runs exactly `steps` steps, ignoring the steady-state predicate.
pub fn run_fixed_steps(initial: SwarmState, params: &SwarmParams, steps: u32) -> Result<RunTrace> {
    let mut states = vec![initial];
    let mut history = Vec::new();
    for _ in 0..steps {
        let prev = states.last().expect("non-empty");
        let next = step(prev, params)?;
        history.push(step_metrics(prev, &next, params)?);
        states.push(next);
    }
    Ok(RunTrace {
        states,
        history,
        converged: false,
    })
}

fn step_metrics(prev: &SwarmState, next: &SwarmState, params: &SwarmParams) -> Result<StepMetrics> {
    let max_displacement = prev
        .drones
        .iter()
        .map(|d| {
            let after = next.drone(d.id).expect("ids preserved by step");
            after.position.distance(&d.position)
        })
        .fold(0.0, f64::max);
    let variation = topology::position_variation(prev, next)?;
    Ok(StepMetrics {
        step: next.step,
        max_displacement,
        mean_position_variation: variation.mean,
        avg_central_distance: topology::avg_central_distance(next)?,
        fully_connected: topology::is_fully_connected(next, params.r_t),
        collision_violations: topology::collision_violations(next, params.r_c),
    })
}
