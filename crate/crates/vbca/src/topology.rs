//! Connectivity checks, steady-state detection, and per-step metrics.

use crate::error::{Error, Result};
use crate::swarm::SwarmState;
use serde::{Deserialize, Serialize};

/// Metrics recorded after each simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u32,
    /// Largest single-drone displacement this step, m.
    pub max_displacement: f64,
    /// Mean absolute change in hub distance over peripherals, m.
    pub mean_position_variation: f64,
    /// Mean distance from peripherals to the central drone, m.
    pub avg_central_distance: f64,
    pub fully_connected: bool,
    /// Unordered pairs closer than the collision range.
    pub collision_violations: usize,
}

/// True iff the transmission graph is connected and, additionally, every
/// peripheral drone has the central drone directly in range (the star
/// constraint, which is the stricter of the two).
pub fn is_fully_connected(state: &SwarmState, r_t: f64) -> bool {
    let n = state.drones.len();
    if n <= 1 {
        return true;
    }

    // Star constraint: every peripheral within r_t of the central drone.
    let central = match state.central() {
        Ok(c) => c,
        Err(_) => return false,
    };
    let star = state
        .peripherals()
        .all(|d| d.position.distance(&central.position) <= r_t);
    if !star {
        return false;
    }

    // Graph connectivity over the closed-ball adjacency, BFS from drone 0.
    let mut visited = vec![false; n];
    let mut queue = vec![0usize];
    visited[0] = true;
    while let Some(i) = queue.pop() {
        let from = state.drones[i].position;
        for (j, seen) in visited.iter_mut().enumerate() {
            if !*seen && from.distance(&state.drones[j].position) <= r_t {
                *seen = true;
                queue.push(j);
            }
        }
    }
    visited.into_iter().all(|v| v)
}

/// Arithmetic mean of peripheral distances to the central drone.
pub fn avg_central_distance(state: &SwarmState) -> Result<f64> {
    let central = state.central()?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for d in state.peripherals() {
        sum += d.position.distance(&central.position);
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoPeripherals);
    }
    Ok(sum / count as f64)
}

/// Per-drone absolute change in distance to the central drone between two
/// consecutive states (approach and drift count alike); the central drone is
/// excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionVariation {
    /// `(drone id, |change in hub distance|)` in the previous state's order.
    pub per_drone: Vec<(u32, f64)>,
    pub mean: f64,
}

pub fn position_variation(prev: &SwarmState, curr: &SwarmState) -> Result<PositionVariation> {
    let prev_central = prev.central()?;
    let curr_central = curr.central()?;

    let mut prev_ids: Vec<u32> = prev.drones.iter().map(|d| d.id).collect();
    let mut curr_ids: Vec<u32> = curr.drones.iter().map(|d| d.id).collect();
    prev_ids.sort_unstable();
    curr_ids.sort_unstable();
    if prev_ids != curr_ids {
        return Err(Error::StateMismatch(
            "states do not contain the same drone ids".into(),
        ));
    }

    let mut per_drone = Vec::new();
    let mut sum = 0.0;
    for d in prev.peripherals() {
        let after = curr.drone(d.id)?;
        let before_dist = d.position.distance(&prev_central.position);
        let after_dist = after.position.distance(&curr_central.position);
        let variation = (after_dist - before_dist).abs();
        per_drone.push((d.id, variation));
        sum += variation;
    }
    let mean = if per_drone.is_empty() {
        0.0
    } else {
        sum / per_drone.len() as f64
    };
    Ok(PositionVariation { per_drone, mean })
}

/// True iff the last `ss_window` entries all moved less than `ss_threshold`
/// while fully connected.
pub fn steady_state_reached(history: &[StepMetrics], ss_threshold: f64, ss_window: u32) -> bool {
    let window = ss_window as usize;
    if window == 0 || history.len() < window {
        return false;
    }
    history[history.len() - window..]
        .iter()
        .all(|m| m.max_displacement < ss_threshold && m.fully_connected)
}

/// Number of unordered drone pairs (all roles) closer than `r_c`.
pub fn collision_violations(state: &SwarmState, r_c: f64) -> usize {
    let n = state.drones.len();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if state.drones[i]
                .position
                .distance(&state.drones[j].position)
                < r_c
            {
                count += 1;
            }
        }
    }
    count
}
