//! Calibration sweep for the cp -> r_gain mapping constant.
//!
//! Runs the full (k, cp) grid for a list of kappa candidates and prints, per
//! kappa: convergence rate, the k=3/cp=10 mean hub distance (target band
//! 5..8 m), the cp=10 and cp=70 distance spreads across k, the largest hub
//! distance seen anywhere (must stay below the 80 m transmission range), and
//! standard-geometry classification rates.
//!
//! Run with: cargo run --release --example calibrate [--diag k cp seed kappa]

use vbca::forces;
use vbca::swarm::{self, SwarmParams};
use vbca::topology;
use vbca::vsepr::{self, GeometrySet};

fn params_with_kappa(cp: f64, kappa: f64, seed: u64) -> SwarmParams {
    let base = SwarmParams::for_cp(cp);
    SwarmParams {
        r_gain: kappa * base.a * cp * cp,
        seed,
        ..base
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.len() >= 2 && args[1] == "--diag" {
        let k: usize = args[2].parse().unwrap();
        let cp: f64 = args[3].parse().unwrap();
        let seed: u64 = args[4].parse().unwrap();
        let kappa: f64 = args[5].parse().unwrap();
        diagnose(k, cp, seed, kappa);
        return;
    }
    if args.len() >= 2 && args[1] == "--attractors" {
        let k: usize = args[2].parse().unwrap();
        let cp: f64 = args[3].parse().unwrap();
        let kappa: f64 = args[4].parse().unwrap();
        attractors(k, cp, kappa);
        return;
    }
    if args.len() >= 2 && args[1] == "--relax" {
        let k: usize = args[2].parse().unwrap();
        let cp: f64 = args[3].parse().unwrap();
        let seed: u64 = args[4].parse().unwrap();
        let kappa: f64 = args[5].parse().unwrap();
        relax(k, cp, seed, kappa);
        return;
    }

    let kappas: Vec<f64> = if args.len() > 1 {
        args[1..].iter().map(|s| s.parse().unwrap()).collect()
    } else {
        vec![0.0625, 0.08, 0.1, 0.125, 0.15, 0.2]
    };

    for kappa in kappas {
        summarize(kappa);
    }
}

fn summarize(kappa: f64) {
    let cps = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0];
    let ks = [3usize, 4, 5, 6, 7, 8, 9, 10];
    let seeds = [1u64, 2, 3, 4, 5];

    let mut cells = 0;
    let mut converged_cells = 0;
    let mut conn_losses = 0;
    let mut max_distance_seen: f64 = 0.0;
    let mut max_dist_cell = (0.0, 0usize);
    let mut mean_dist = vec![vec![0.0f64; ks.len()]; cps.len()];
    let mut worst_steps = 0usize;
    let mut worst_cell = (0.0, 0usize, 0u64);

    for (ci, &cp) in cps.iter().enumerate() {
        for (ki, &k) in ks.iter().enumerate() {
            let mut dists = Vec::new();
            for &seed in &seeds {
                cells += 1;
                let params = params_with_kappa(cp, kappa, seed);
                let initial = swarm::initialize(k, &params).unwrap();
                // Track the transient peak hub distance, not just the final.
                let mut state = initial;
                let mut history = Vec::new();
                let mut converged = false;
                let mut failed = false;
                for _ in 0..params.max_steps {
                    match forces::step(&state, &params) {
                        Ok(next) => {
                            let central = next.central().unwrap().position;
                            for d in next.peripherals() {
                                let dist = d.position.distance(&central);
                                if dist > max_distance_seen {
                                    max_distance_seen = dist;
                                    max_dist_cell = (cp, k);
                                }
                            }
                            let metrics = {
                                let variation =
                                    topology::position_variation(&state, &next).unwrap();
                                let max_disp = state
                                    .drones
                                    .iter()
                                    .map(|d| {
                                        next.drone(d.id)
                                            .unwrap()
                                            .position
                                            .distance(&d.position)
                                    })
                                    .fold(0.0f64, f64::max);
                                vbca::topology::StepMetrics {
                                    step: next.step,
                                    max_displacement: max_disp,
                                    mean_position_variation: variation.mean,
                                    avg_central_distance:
                                        topology::avg_central_distance(&next).unwrap(),
                                    fully_connected: topology::is_fully_connected(
                                        &next, params.r_t,
                                    ),
                                    collision_violations: 0,
                                }
                            };
                            history.push(metrics);
                            state = next;
                            if topology::steady_state_reached(
                                &history,
                                params.ss_threshold,
                                params.ss_window,
                            ) {
                                converged = true;
                                break;
                            }
                        }
                        Err(_) => {
                            conn_losses += 1;
                            failed = true;
                            break;
                        }
                    }
                }
                if failed {
                    continue;
                }
                if converged {
                    converged_cells += 1;
                    if history.len() > worst_steps {
                        worst_steps = history.len();
                        worst_cell = (cp, k, seed);
                    }
                }
                dists.push(topology::avg_central_distance(&state).unwrap());
            }
            if !dists.is_empty() {
                mean_dist[ci][ki] = dists.iter().sum::<f64>() / dists.len() as f64;
            }
        }
    }

    let spread = |ci: usize| -> (f64, f64, f64) {
        let row = &mean_dist[ci];
        let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = row.iter().cloned().fold(0.0, f64::max);
        (min, max, max - min)
    };
    let (d3_cp10, _, _) = (mean_dist[0][0], 0.0, 0.0);
    let (min10, max10, spread10) = spread(0);
    let (min70, max70, spread70) = spread(6);

    println!("kappa={kappa:.4}");
    println!(
        "  converged {}/{} cells, {} connectivity losses, worst steps {} at (cp={}, k={}, seed={})",
        converged_cells, cells, conn_losses, worst_steps, worst_cell.0, worst_cell.1, worst_cell.2
    );
    println!("  d(k=3,cp=10) = {d3_cp10:.2} m (target 5..8)");
    println!("  cp=10 distances [{min10:.2}, {max10:.2}] spread {spread10:.2} m");
    println!("  cp=70 distances [{min70:.2}, {max70:.2}] spread {spread70:.2} m (target 20..40)");
    println!(
        "  max hub distance seen {max_distance_seen:.2} m (limit 80) at (cp={}, k={})",
        max_dist_cell.0, max_dist_cell.1
    );

    // Geometry reproduction, 20 seeds per k, measured at the tight annealing
    // threshold (0.02 m) so the slow tangential mode finishes settling, and
    // at cp=30 so every pairwise separation stays inside the full-strength
    // interaction region.
    for k in [2usize, 3, 4, 5, 6, 7] {
        let mut good = 0;
        let mut rms_sum = 0.0;
        let mut worst_anneal = 0usize;
        for seed in 1..=20u64 {
            let mut params = params_with_kappa(30.0, kappa, seed);
            params.ss_threshold = 0.02;
            let initial = swarm::initialize(k, &params).unwrap();
            if let Ok((final_state, history, true)) =
                forces::run_to_steady_state(initial, &params)
            {
                worst_anneal = worst_anneal.max(history.len());
                let candidates =
                    vsepr::reference_geometries(k, GeometrySet::WithExtended).unwrap();
                let c = vsepr::classify_geometry(&final_state, &candidates).unwrap();
                rms_sum += c.rms_angle_error;
                let standard = &candidates[0];
                let ok = if k == 5 || k == 7 {
                    candidates.iter().any(|g| g.name == c.best_match)
                } else {
                    c.best_match == standard.name && c.rms_angle_error < 5.0
                };
                if ok {
                    good += 1;
                }
            }
        }
        println!(
            "  k={k}: standard geometry in {good}/20 runs (mean rms {:.2} deg, worst anneal {} steps)",
            rms_sum / 20.0,
            worst_anneal
        );
    }
}

/// Gate-free relaxation: track rms angle error and displacement together.
fn relax(k: usize, cp: f64, seed: u64, kappa: f64) {
    let params = params_with_kappa(cp, kappa, seed);
    let initial = swarm::initialize(k, &params).unwrap();
    let candidates = vsepr::reference_geometries(k, GeometrySet::WithExtended).unwrap();
    let mut state = initial;
    println!("step max_disp rms_vs_best best");
    for s in 1..=1000u32 {
        let next = forces::step(&state, &params).unwrap();
        let max_disp = state
            .drones
            .iter()
            .map(|d| next.drone(d.id).unwrap().position.distance(&d.position))
            .fold(0.0f64, f64::max);
        if s % 20 == 0 || s <= 5 {
            let c = vsepr::classify_geometry(&next, &candidates).unwrap();
            println!(
                "{s:4} {max_disp:9.4} {:8.3} {}",
                c.rms_angle_error, c.best_match
            );
        }
        state = next;
    }
}

fn attractors(k: usize, cp: f64, kappa: f64) {
    for seed in 1..=20u64 {
        let mut params = params_with_kappa(cp, kappa, seed);
        params.ss_threshold = 0.02;
        let initial = swarm::initialize(k, &params).unwrap();
        match forces::run_to_steady_state(initial, &params) {
            Ok((final_state, history, converged)) => {
                let spectrum = vsepr::angle_spectrum(&final_state).unwrap();
                let rounded: Vec<String> =
                    spectrum.iter().map(|a| format!("{a:.0}")).collect();
                let central = final_state.central().unwrap().position;
                let dists: Vec<String> = final_state
                    .peripherals()
                    .map(|d| format!("{:.1}", d.position.distance(&central)))
                    .collect();
                println!(
                    "seed {seed:2} conv={} steps={:4} dists [{}] spectrum [{}]",
                    converged,
                    history.len(),
                    dists.join(","),
                    rounded.join(",")
                );
                if seed <= 3 {
                    for d in final_state.peripherals() {
                        println!(
                            "    id {} ({:8.3}, {:8.3}, {:8.3})",
                            d.id, d.position.x, d.position.y, d.position.z
                        );
                    }
                }
            }
            Err(e) => println!("seed {seed:2} error: {e}"),
        }
    }
}

fn diagnose(k: usize, cp: f64, seed: u64, kappa: f64) {
    let params = params_with_kappa(cp, kappa, seed);
    let unstable_band = (2.0 * params.r_gain / (2.0 - params.a)).sqrt();
    println!(
        "r_gain={:.3} predicted unstable per-axis band: ({}, {:.3})",
        params.r_gain, params.epsilon, unstable_band
    );
    let initial = swarm::initialize(k, &params).unwrap();
    let mut state = initial;
    println!("step max_disp avg_dist min_pair max_hub connected");
    for _ in 0..params.max_steps {
        let next = match forces::step(&state, &params) {
            Ok(n) => n,
            Err(e) => {
                println!("error: {e}");
                return;
            }
        };
        let central = next.central().unwrap();
        let max_disp = state
            .drones
            .iter()
            .map(|d| {
                next.drone(d.id)
                    .unwrap()
                    .position
                    .distance(&d.position)
            })
            .fold(0.0f64, f64::max);
        let avg = topology::avg_central_distance(&next).unwrap();
        let mut min_pair = f64::INFINITY;
        let peripherals: Vec<_> = next.peripherals().collect();
        for i in 0..peripherals.len() {
            for j in (i + 1)..peripherals.len() {
                min_pair = min_pair
                    .min(peripherals[i].position.distance(&peripherals[j].position));
            }
        }
        let max_hub = peripherals
            .iter()
            .map(|d| d.position.distance(&central.position))
            .fold(0.0f64, f64::max);
        let connected = topology::is_fully_connected(&next, params.r_t);
        if next.step % 100 == 0 {
            // Pair-axis separations inside the predicted unstable band.
            let mut band: Vec<String> = Vec::new();
            for i in 0..peripherals.len() {
                for j in (i + 1)..peripherals.len() {
                    let d = peripherals[i].position - peripherals[j].position;
                    for (axis, v) in [("x", d.x), ("y", d.y), ("z", d.z)] {
                        if v.abs() >= params.epsilon && v.abs() < unstable_band {
                            band.push(format!(
                                "{}-{}{axis}:{:.2}",
                                peripherals[i].id,
                                peripherals[j].id,
                                v.abs()
                            ));
                        }
                    }
                }
            }
            println!(
                "{:4} {max_disp:10.4} {avg:8.3} {min_pair:8.3} {max_hub:8.3} {connected} band[{}]",
                next.step,
                band.join(" ")
            );
        }
        state = next;
    }
    if let Ok(spectrum) = vsepr::angle_spectrum(&state) {
        let rounded: Vec<String> = spectrum.iter().map(|a| format!("{a:.1}")).collect();
        println!("final angle spectrum: [{}]", rounded.join(", "));
    }
    if let Ok(candidates) =
        vsepr::reference_geometries(k, GeometrySet::WithExtended)
    {
        let c = vsepr::classify_geometry(&state, &candidates).unwrap();
        println!(
            "classified: {} rms {:.2} (runner-up {:?} {:?})",
            c.best_match, c.rms_angle_error, c.runner_up, c.runner_up_error
        );
    }
}
