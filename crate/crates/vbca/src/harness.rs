//! Scenario configuration, the experiment runner, parameter sweeps, and
//! deterministic rendering of trajectories and reports.
//!
//! Everything here returns in-memory tables and rendered strings; writing to
//! disk is a thin layer on top so outputs stay byte-reproducible functions of
//! `(config, seeds)`.

use crate::coverage::{self, CoverageEstimate};
use crate::error::{Error, Result};
use crate::forces::{self, RunTrace};
use crate::swarm::{self, SwarmParams, SwarmState};
use crate::topology::{self, StepMetrics};
use crate::vec3::Vec3;
use crate::vsepr::{self, ClassificationResult, GeometrySet};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Grid used by the sweeps: compactness values by ten.
pub const CP_GRID: [f64; 7] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0];
/// Grid used by the sweeps: peripheral counts.
pub const K_GRID: [usize; 8] = [3, 4, 5, 6, 7, 8, 9, 10];

/// Optional per-field overrides on top of the cp-derived defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub a: Option<f64>,
    pub r_gain: Option<f64>,
    pub r_t: Option<f64>,
    pub r_c: Option<f64>,
    pub c_obs: Option<f64>,
    pub epsilon: Option<f64>,
    pub v_max: Option<f64>,
    pub jitter_radius: Option<f64>,
    pub seed: Option<u64>,
    pub ss_threshold: Option<f64>,
    pub ss_window: Option<u32>,
    pub max_steps: Option<u32>,
}

impl ParamOverrides {
    pub fn apply(&self, mut p: SwarmParams) -> SwarmParams {
        if let Some(v) = self.a {
            p.a = v;
        }
        if let Some(v) = self.r_gain {
            p.r_gain = v;
        }
        if let Some(v) = self.r_t {
            p.r_t = v;
        }
        if let Some(v) = self.r_c {
            p.r_c = v;
        }
        if let Some(v) = self.c_obs {
            p.c_obs = v;
        }
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.v_max {
            p.v_max = v;
        }
        if let Some(v) = self.jitter_radius {
            p.jitter_radius = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.ss_threshold {
            p.ss_threshold = v;
        }
        if let Some(v) = self.ss_window {
            p.ss_window = v;
        }
        if let Some(v) = self.max_steps {
            p.max_steps = v;
        }
        p
    }
}

/// One experiment: swarm size, compactness, parameter overrides, and the
/// coverage sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub k_peripheral: usize,
    pub cp: f64,
    #[serde(default)]
    pub overrides: ParamOverrides,
    pub coverage_samples: u64,
    pub coverage_seed: u64,
    /// When false the central drone's sensing sphere is left out of coverage.
    pub include_central_coverage: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k_peripheral: 7,
            cp: 40.0,
            overrides: ParamOverrides::default(),
            coverage_samples: 1_000_000,
            coverage_seed: 42,
            include_central_coverage: true,
        }
    }
}

impl ScenarioConfig {
    /// Resolves to validated simulation parameters.
    pub fn resolve(&self) -> Result<SwarmParams> {
        if self.k_peripheral == 0 {
            return Err(Error::DegenerateSwarm);
        }
        if self.cp <= 0.0 {
            return Err(Error::Parameter("cp must be > 0".into()));
        }
        let params = self.overrides.apply(SwarmParams::for_cp(self.cp));
        swarm::validate_params(&params).map_err(Error::InvalidParams)?;
        Ok(params)
    }
}

/// Everything the paper-style figures need from one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub converged: bool,
    /// Step at which the quiet window began (total steps when not converged).
    pub steps_to_steady_state: u32,
    pub final_avg_central_distance: f64,
    pub coverage: CoverageEstimate,
    /// Union coverage divided by the theoretical maximum.
    pub coverage_efficiency: f64,
    pub classification: Option<ClassificationResult>,
    /// Max/min hub-distance ratio; 1.0 is a perfectly uniform shell.
    pub radial_uniformity: Option<f64>,
    /// Pairs closer than the collision range in the final state.
    pub collision_violations: usize,
    pub metrics: Vec<StepMetrics>,
}

/// A finished run: the report plus every intermediate state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub states: Vec<SwarmState>,
}

/// Initialize, run to steady state, and assemble the report.
///
/// Non-convergence is data (`converged = false`); connectivity loss is an
/// error carrying the offending drone and step.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutcome> {
    let params = config.resolve()?;
    let initial = swarm::initialize(config.k_peripheral, &params)?;
    let trace = forces::run_recording(initial, &params)?;
    let report = build_report(config, &params, &trace)?;
    Ok(RunOutcome {
        report,
        states: trace.states,
    })
}

fn build_report(
    config: &ScenarioConfig,
    params: &SwarmParams,
    trace: &RunTrace,
) -> Result<RunReport> {
    let final_state = trace.final_state();

    let centers: Vec<Vec3> = final_state
        .drones
        .iter()
        .filter(|d| config.include_central_coverage || d.role == swarm::DroneRole::Peripheral)
        .map(|d| d.position)
        .collect();
    let radii = vec![params.c_obs; centers.len()];
    let estimate =
        coverage::union_volume_mc(&centers, &radii, config.coverage_samples, config.coverage_seed)?;
    let v_max = coverage::max_volume(&radii)?;

    let classification = match vsepr::reference_geometries(
        config.k_peripheral,
        GeometrySet::WithExtended,
    ) {
        Ok(candidates) => Some(vsepr::classify_geometry(final_state, &candidates)?),
        Err(Error::UnsupportedK(_)) => None,
        Err(e) => return Err(e),
    };

    Ok(RunReport {
        converged: trace.converged,
        steps_to_steady_state: trace.steps_to_steady_state(params.ss_window),
        final_avg_central_distance: topology::avg_central_distance(final_state)?,
        coverage: estimate,
        coverage_efficiency: estimate.volume / v_max,
        classification,
        radial_uniformity: Some(vsepr::radial_uniformity(final_state)?),
        collision_violations: topology::collision_violations(final_state, params.r_c),
        metrics: trace.history.clone(),
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// CSV trajectory: one row per drone per recorded step, positions to 6
/// decimal places.
pub fn trajectory_csv(states: &[SwarmState]) -> String {
    let mut out = String::from("step,id,role,x,y,z,vx,vy,vz\n");
    for state in states {
        for d in &state.drones {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                state.step,
                d.id,
                d.role.as_str(),
                d.position.x,
                d.position.y,
                d.position.z,
                d.velocity.x,
                d.velocity.y,
                d.velocity.z
            );
        }
    }
    out
}

/// Pretty JSON report: full-precision numbers plus a rounded display block.
pub fn report_json(report: &RunReport) -> String {
    let mut value = serde_json::to_value(report).expect("report serializes");
    let display = serde_json::json!({
        "converged": report.converged,
        "steps_to_steady_state": report.steps_to_steady_state,
        "avg_central_distance_m": format!("{:.3}", report.final_avg_central_distance),
        "coverage_m3": format!("{:.1}", report.coverage.volume),
        "coverage_std_error_m3": format!("{:.1}", report.coverage.std_error),
        "coverage_efficiency": format!("{:.4}", report.coverage_efficiency),
        "geometry": report
            .classification
            .as_ref()
            .map(|c| format!("{} (rms {:.2} deg)", c.best_match, c.rms_angle_error))
            .unwrap_or_else(|| "unclassified".to_string()),
        "collision_violations": report.collision_violations,
    });
    value
        .as_object_mut()
        .expect("report is a JSON object")
        .insert("display".to_string(), display);
    let mut text = serde_json::to_string_pretty(&value).expect("report renders");
    text.push('\n');
    text
}

/// Writes `trajectory.csv` and `report.json` under `dir`.
pub fn write_run_outputs(outcome: &RunOutcome, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let trajectory_path = dir.join("trajectory.csv");
    let report_path = dir.join("report.json");
    std::fs::write(&trajectory_path, trajectory_csv(&outcome.states))?;
    std::fs::write(&report_path, report_json(&outcome.report))?;
    Ok((trajectory_path, report_path))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn fmt_err(e: &Option<String>) -> String {
    e.clone().unwrap_or_default()
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Shared settings for the sweep runners. Per-cell simulation seeds are
/// `base_seed + row index`, coverage seeds `coverage_seed + row index`, both
/// recorded in the output rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base_seed: u64,
    pub coverage_samples: u64,
    pub coverage_seed: u64,
    pub max_steps: u32,
    pub include_central_coverage: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base_seed: 1,
            coverage_samples: 1_000_000,
            coverage_seed: 42,
            max_steps: 2000,
            include_central_coverage: true,
        }
    }
}

fn cell_params(cp: f64, seed: u64, max_steps: u32) -> SwarmParams {
    SwarmParams {
        seed,
        max_steps,
        ..SwarmParams::for_cp(cp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub cp: f64,
    pub k: usize,
    pub seed: u64,
    pub avg_central_distance: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

/// Average hub distance over the (cp, k) grid.
pub fn sweep_cp_vs_distance(cfg: &SweepConfig) -> Vec<DistanceRow> {
    let mut rows = Vec::new();
    for &cp in &CP_GRID {
        for &k in &K_GRID {
            let seed = cfg.base_seed + rows.len() as u64;
            let params = cell_params(cp, seed, cfg.max_steps);
            let row = match swarm::initialize(k, &params)
                .and_then(|s| forces::run_to_steady_state(s, &params))
            {
                Ok((final_state, _, converged)) => DistanceRow {
                    cp,
                    k,
                    seed,
                    avg_central_distance: topology::avg_central_distance(&final_state).ok(),
                    converged,
                    error: None,
                },
                Err(e) => DistanceRow {
                    cp,
                    k,
                    seed,
                    avg_central_distance: None,
                    converged: false,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    rows
}

pub fn distance_csv(rows: &[DistanceRow]) -> String {
    let mut out = String::from("cp,k,seed,avg_central_distance_m,converged,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.cp,
            r.k,
            r.seed,
            fmt_opt(r.avg_central_distance),
            r.converged,
            fmt_err(&r.error)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub cp: f64,
    pub k: usize,
    pub seed: u64,
    pub union_volume: Option<f64>,
    pub std_error: Option<f64>,
    pub max_volume: f64,
    pub efficiency: Option<f64>,
    pub error: Option<String>,
}

/// Least-squares fit of union volume against k for one cp column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub cp: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageSweep {
    pub rows: Vec<CoverageRow>,
    pub fits: Vec<LinearFit>,
}

/// Union coverage over the (cp, k) grid with a per-cp linear fit.
pub fn sweep_coverage_vs_k(cfg: &SweepConfig) -> CoverageSweep {
    let mut rows = Vec::new();
    for &cp in &CP_GRID {
        for &k in &K_GRID {
            let idx = rows.len() as u64;
            let seed = cfg.base_seed + idx;
            let params = cell_params(cp, seed, cfg.max_steps);
            let row = match swarm::initialize(k, &params)
                .and_then(|s| forces::run_to_steady_state(s, &params))
                .and_then(|(final_state, _, converged)| {
                    let centers: Vec<Vec3> = final_state
                        .drones
                        .iter()
                        .filter(|d| {
                            cfg.include_central_coverage
                                || d.role == swarm::DroneRole::Peripheral
                        })
                        .map(|d| d.position)
                        .collect();
                    let radii = vec![params.c_obs; centers.len()];
                    let est = coverage::union_volume_mc(
                        &centers,
                        &radii,
                        cfg.coverage_samples,
                        cfg.coverage_seed + idx,
                    )?;
                    let vm = coverage::max_volume(&radii)?;
                    Ok((est, vm, converged))
                }) {
                Ok((est, vm, converged)) => CoverageRow {
                    cp,
                    k,
                    seed,
                    union_volume: Some(est.volume),
                    std_error: Some(est.std_error),
                    max_volume: vm,
                    efficiency: Some(est.volume / vm),
                    error: if converged {
                        None
                    } else {
                        Some("non-convergence".to_string())
                    },
                },
                Err(e) => CoverageRow {
                    cp,
                    k,
                    seed,
                    union_volume: None,
                    std_error: None,
                    max_volume: 0.0,
                    efficiency: None,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }

    let fits = CP_GRID
        .iter()
        .filter_map(|&cp| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.cp == cp)
                .filter_map(|r| r.union_volume.map(|v| (r.k as f64, v)))
                .collect();
            linear_fit(&points).map(|(slope, intercept, r_squared)| LinearFit {
                cp,
                slope,
                intercept,
                r_squared,
            })
        })
        .collect();

    CoverageSweep { rows, fits }
}

/// Returns (slope, intercept, r_squared) of the least-squares line.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Some((slope, intercept, r_squared))
}

pub fn coverage_csv(sweep: &CoverageSweep) -> String {
    let mut out =
        String::from("cp,k,seed,union_volume_m3,std_error_m3,max_volume_m3,efficiency,error\n");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{}",
            r.cp,
            r.k,
            r.seed,
            fmt_opt(r.union_volume),
            fmt_opt(r.std_error),
            r.max_volume,
            fmt_opt(r.efficiency),
            fmt_err(&r.error)
        );
    }
    for f in &sweep.fits {
        let _ = writeln!(
            out,
            "# fit cp={} slope={:.6} intercept={:.6} r_squared={:.6}",
            f.cp, f.slope, f.intercept, f.r_squared
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub k: usize,
    pub cp: f64,
    pub seed: u64,
    pub vbca_union: Option<f64>,
    pub avg_central_distance: Option<f64>,
    pub baseline_union: Option<f64>,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

/// Compactness values used in the baseline comparison.
pub const BASELINE_CPS: [f64; 2] = [40.0, 50.0];
/// Peripheral counts used in the baseline comparison.
pub const BASELINE_KS: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];

/// Swarm coverage against the exact standard placement at the matched mean
/// hub distance.
pub fn baseline_comparison(cfg: &SweepConfig) -> Vec<BaselineRow> {
    let mut rows = Vec::new();
    for &cp in &BASELINE_CPS {
        for &k in &BASELINE_KS {
            let idx = rows.len() as u64;
            let seed = cfg.base_seed + idx;
            let params = cell_params(cp, seed, cfg.max_steps);
            let row = match swarm::initialize(k, &params)
                .and_then(|s| forces::run_to_steady_state(s, &params))
                .and_then(|(final_state, _, _)| {
                    let distance = topology::avg_central_distance(&final_state)?;
                    let vbca = coverage::swarm_coverage(
                        &final_state,
                        params.c_obs,
                        cfg.coverage_samples,
                        cfg.coverage_seed + idx,
                    )?;
                    let baseline = vsepr::baseline_coverage(
                        k,
                        distance,
                        params.c_obs,
                        cfg.coverage_samples,
                        cfg.coverage_seed + idx,
                    )?;
                    Ok((distance, vbca, baseline))
                }) {
                Ok((distance, vbca, baseline)) => BaselineRow {
                    k,
                    cp,
                    seed,
                    vbca_union: Some(vbca.volume),
                    avg_central_distance: Some(distance),
                    baseline_union: Some(baseline.volume),
                    ratio: Some(vbca.volume / baseline.volume),
                    error: None,
                },
                Err(e) => BaselineRow {
                    k,
                    cp,
                    seed,
                    vbca_union: None,
                    avg_central_distance: None,
                    baseline_union: None,
                    ratio: None,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    rows
}

pub fn baseline_csv(rows: &[BaselineRow]) -> String {
    let mut out = String::from(
        "# baseline = exact placement of the standard reference geometry at the matched mean hub distance (internal reference)\n",
    );
    out.push_str(
        "k,cp,seed,vbca_union_m3,avg_central_distance_m,baseline_union_m3,ratio,error\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.cp,
            r.seed,
            fmt_opt(r.vbca_union),
            fmt_opt(r.avg_central_distance),
            fmt_opt(r.baseline_union),
            fmt_opt(r.ratio),
            fmt_err(&r.error)
        );
    }
    out
}

/// Per-step absolute hub-distance change for every peripheral drone.
///
/// Row 0 holds the initial hub distances themselves (the jitter offsets);
/// row t >= 1 holds `|distance(t) - distance(t-1)|` per drone plus the mean.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityTrace {
    pub drone_ids: Vec<u32>,
    pub rows: Vec<StabilityRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub step: u32,
    pub per_drone: Vec<f64>,
    pub mean: f64,
}

/// Runs one scenario and tabulates per-step position variation.
///
/// With `horizon = None` the run stops at steady state (or the step budget);
/// the row count then equals `steps_to_steady_state + ss_window` for a
/// converged run. With `horizon = Some(n)` exactly n steps are traced.
pub fn stability_trace(
    k: usize,
    params: &SwarmParams,
    horizon: Option<u32>,
) -> Result<StabilityTrace> {
    let initial = swarm::initialize(k, params)?;
    let trace = match horizon {
        Some(steps) => forces::run_fixed_steps(initial, params, steps)?,
        None => forces::run_recording(initial, params)?,
    };

    let first = &trace.states[0];
    let central = first.central()?;
    let drone_ids: Vec<u32> = first.peripherals().map(|d| d.id).collect();

    let initial_distances: Vec<f64> = first
        .peripherals()
        .map(|d| d.position.distance(&central.position))
        .collect();
    let mean0 = initial_distances.iter().sum::<f64>() / initial_distances.len().max(1) as f64;
    let mut rows = vec![StabilityRow {
        step: 0,
        per_drone: initial_distances,
        mean: mean0,
    }];

    for pair in trace.states.windows(2) {
        let variation = topology::position_variation(&pair[0], &pair[1])?;
        rows.push(StabilityRow {
            step: pair[1].step,
            per_drone: variation.per_drone.iter().map(|&(_, v)| v).collect(),
            mean: variation.mean,
        });
    }

    Ok(StabilityTrace { drone_ids, rows })
}

pub fn stability_csv(trace: &StabilityTrace) -> String {
    let mut out = String::from("step");
    for id in &trace.drone_ids {
        let _ = write!(out, ",drone{id}_m");
    }
    out.push_str(",mean_m\n");
    for row in &trace.rows {
        let _ = write!(out, "{}", row.step);
        for v in &row.per_drone {
            let _ = write!(out, ",{v:.6}");
        }
        let _ = writeln!(out, ",{:.6}", row.mean);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_resolves() {
        let params = ScenarioConfig::default().resolve().unwrap();
        assert_eq!(params.cp, 40.0);
        assert_eq!(params.a, 0.05);
    }

    #[test]
    fn zero_k_is_rejected_at_config_level() {
        let config = ScenarioConfig {
            k_peripheral: 0,
            ..ScenarioConfig::default()
        };
        assert_eq!(config.resolve().unwrap_err(), Error::DegenerateSwarm);
    }

    #[test]
    fn overrides_take_effect_and_are_validated() {
        let mut config = ScenarioConfig::default();
        config.overrides.r_t = Some(120.0);
        assert_eq!(config.resolve().unwrap().r_t, 120.0);

        config.overrides.epsilon = Some(0.0);
        assert!(matches!(config.resolve(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn run_scenario_is_reproducible_to_the_byte() {
        let config = ScenarioConfig {
            k_peripheral: 4,
            coverage_samples: 50_000,
            ..ScenarioConfig::default()
        };
        let a = run_scenario(&config).unwrap();
        let b = run_scenario(&config).unwrap();
        assert_eq!(trajectory_csv(&a.states), trajectory_csv(&b.states));
        assert_eq!(report_json(&a.report), report_json(&b.report));
    }

    #[test]
    fn tetrahedron_emerges_for_four_peripherals() {
        let config = ScenarioConfig {
            k_peripheral: 4,
            coverage_samples: 20_000,
            ..ScenarioConfig::default()
        };
        let outcome = run_scenario(&config).unwrap();
        assert!(outcome.report.converged);
        let classification = outcome.report.classification.unwrap();
        assert_eq!(classification.best_match, "tetrahedral");
    }

    #[test]
    fn efficiency_stays_in_unit_interval() {
        let config = ScenarioConfig {
            k_peripheral: 5,
            coverage_samples: 100_000,
            ..ScenarioConfig::default()
        };
        let outcome = run_scenario(&config).unwrap();
        let eff = outcome.report.coverage_efficiency;
        assert!(eff > 0.0 && eff <= 1.0, "efficiency {eff} out of range");
    }

    #[test]
    fn trajectory_csv_shape_and_header() {
        let config = ScenarioConfig {
            k_peripheral: 2,
            coverage_samples: 20_000,
            ..ScenarioConfig::default()
        };
        let outcome = run_scenario(&config).unwrap();
        let csv = trajectory_csv(&outcome.states);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,id,role,x,y,z,vx,vy,vz"));
        // One row per drone per recorded state.
        assert_eq!(csv.lines().count(), 1 + outcome.states.len() * 3);
        let first_data = csv.lines().nth(1).unwrap();
        assert!(first_data.starts_with("0,0,central,0.000000,"));
    }

    #[test]
    fn report_json_has_display_block() {
        let config = ScenarioConfig {
            k_peripheral: 3,
            coverage_samples: 20_000,
            ..ScenarioConfig::default()
        };
        let outcome = run_scenario(&config).unwrap();
        let text = report_json(&outcome.report);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(value["display"]["avg_central_distance_m"].is_string());
        assert_eq!(value["converged"], serde_json::json!(true));
    }

    #[test]
    fn stability_trace_row_count_matches_contract() {
        let params = SwarmParams::for_cp(40.0);
        let trace = stability_trace(4, &params, None).unwrap();
        // Converged run: rows = steps_to_steady_state + ss_window
        // (row 0 plus one row per executed step).
        let executed = trace.rows.len() - 1;
        let steps_to_ss = executed as u32 + 1 - params.ss_window;
        assert_eq!(
            trace.rows.len() as u32,
            steps_to_ss + params.ss_window,
            "row-count contract violated"
        );
        // Row 0 carries jitter-scale hub distances.
        assert!(trace.rows[0].per_drone.iter().all(|&d| d > 0.0 && d < 0.5));
    }

    #[test]
    fn stability_trace_fixed_horizon() {
        let params = SwarmParams::for_cp(40.0);
        let trace = stability_trace(3, &params, Some(50)).unwrap();
        assert_eq!(trace.rows.len(), 51);
        assert_eq!(trace.rows.last().unwrap().step, 50);
        let csv = stability_csv(&trace);
        assert!(csv.starts_with("step,drone1_m,drone2_m,drone3_m,mean_m\n"));
        assert_eq!(csv.lines().count(), 52);
    }

    #[test]
    fn failed_cells_are_recorded_not_fatal() {
        // A zero step budget leaves every cell unconverged; the sweep still
        // produces a complete table.
        let cfg = SweepConfig {
            max_steps: 0,
            ..SweepConfig::default()
        };
        let rows = sweep_cp_vs_distance(&cfg);
        assert_eq!(rows.len(), CP_GRID.len() * K_GRID.len());
        assert!(rows.iter().all(|r| !r.converged));
        assert!(rows.iter().all(|r| r.avg_central_distance.is_some()));
    }

    #[test]
    fn two_peripheral_baseline_row_matches_collinear_oracle() {
        // k = 2 places three equal spheres on a line at -d, 0, +d. For
        // d <= c_obs the outer lens is contained in the middle sphere, so
        // union = 3V - 2 lens(d) by inclusion-exclusion.
        let cfg = SweepConfig {
            coverage_samples: 400_000,
            ..SweepConfig::default()
        };
        let rows = baseline_comparison(&cfg);
        let row = rows.iter().find(|r| r.k == 2 && r.cp == 40.0).unwrap();
        let d = row.avg_central_distance.unwrap();
        assert!(d <= 40.0, "collinear oracle needs d <= c_obs, got {d}");
        let c_obs = 40.0f64;
        let v = 4.0 / 3.0 * std::f64::consts::PI * c_obs.powi(3);
        let lens = 2.0 * v - crate::coverage::two_sphere_union_exact(c_obs, c_obs, d).unwrap();
        let exact = 3.0 * v - 2.0 * lens;
        let measured = row.baseline_union.unwrap();
        assert!(
            (measured - exact).abs() <= 0.01 * exact,
            "baseline union {measured} vs analytic {exact}"
        );
    }

    #[test]
    fn linear_fit_recovers_an_exact_line() {
        let points: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 3.0 * i as f64 + 2.0)).collect();
        let (slope, intercept, r2) = linear_fit(&points).unwrap();
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept - 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_csv_is_self_describing() {
        let rows = vec![DistanceRow {
            cp: 10.0,
            k: 3,
            seed: 1,
            avg_central_distance: Some(6.5),
            converged: true,
            error: None,
        }];
        let csv = distance_csv(&rows);
        assert!(csv.starts_with("cp,k,seed,avg_central_distance_m,converged,error\n"));
        assert!(csv.contains("10,3,1,6.500000,true,"));
    }
}
