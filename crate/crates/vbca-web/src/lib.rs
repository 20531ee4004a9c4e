//! wasm-bindgen bindings for the browser demo.
//!
//! Three interactive operations are exposed to JavaScript, all exchanging
//! plain JSON strings so the page needs no generated glue beyond the module
//! loader: stepping the force simulation, classifying the current shape
//! against the reference geometries, and estimating union volume coverage.
//!
//! Build with: wasm-pack build --target web --out-dir www/pkg

use vbca::coverage;
use vbca::forces;
use vbca::harness;
use vbca::swarm::{self, SwarmParams, SwarmState};
use vbca::topology;
use vbca::vsepr::{self, GeometrySet};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Swarm {
    params: SwarmParams,
    state: SwarmState,
    history: Vec<topology::StepMetrics>,
    converged: bool,
    connectivity_lost: Option<String>,
}

#[wasm_bindgen]
impl Swarm {
    /// Fresh co-located swarm: k peripheral drones, compactness cp.
    #[wasm_bindgen(constructor)]
    pub fn new(k: usize, cp: f64, seed: u32) -> Result<Swarm, String> {
        let params = SwarmParams {
            seed: seed as u64,
            ..SwarmParams::for_cp(cp)
        };
        let state = swarm::initialize(k, &params).map_err(|e| e.to_string())?;
        Ok(Swarm {
            params,
            state,
            history: Vec::new(),
            converged: false,
            connectivity_lost: None,
        })
    }

    /// Advances up to `steps` updates (stops early at steady state or on
    /// connectivity loss) and returns the latest metrics as JSON.
    pub fn tick(&mut self, steps: u32) -> String {
        for _ in 0..steps {
            if self.converged || self.connectivity_lost.is_some() {
                break;
            }
            match forces::step(&self.state, &self.params) {
                Ok(next) => {
                    let max_displacement = self
                        .state
                        .drones
                        .iter()
                        .map(|d| {
                            next.drone(d.id)
                                .map(|after| after.position.distance(&d.position))
                                .unwrap_or(0.0)
                        })
                        .fold(0.0, f64::max);
                    let variation = topology::position_variation(&self.state, &next)
                        .map(|v| v.mean)
                        .unwrap_or(0.0);
                    let metrics = topology::StepMetrics {
                        step: next.step,
                        max_displacement,
                        mean_position_variation: variation,
                        avg_central_distance: topology::avg_central_distance(&next)
                            .unwrap_or(0.0),
                        fully_connected: topology::is_fully_connected(&next, self.params.r_t),
                        collision_violations: topology::collision_violations(
                            &next,
                            self.params.r_c,
                        ),
                    };
                    self.history.push(metrics);
                    self.state = next;
                    if topology::steady_state_reached(
                        &self.history,
                        self.params.ss_threshold,
                        self.params.ss_window,
                    ) {
                        self.converged = true;
                    }
                }
                Err(e) => {
                    self.connectivity_lost = Some(e.to_string());
                }
            }
        }
        self.status_json()
    }

    /// Latest metrics without advancing.
    pub fn status_json(&self) -> String {
        let last = self.history.last();
        serde_json::json!({
            "step": self.state.step,
            "converged": self.converged,
            "connectivity_lost": self.connectivity_lost,
            "max_displacement": last.map(|m| m.max_displacement),
            "mean_position_variation": last.map(|m| m.mean_position_variation),
            "avg_central_distance": last.map(|m| m.avg_central_distance),
            "fully_connected": last.map(|m| m.fully_connected).unwrap_or(true),
            "collision_violations": last.map(|m| m.collision_violations).unwrap_or(0),
        })
        .to_string()
    }

    /// Drone positions as JSON: [{id, role, x, y, z}].
    pub fn positions_json(&self) -> String {
        let drones: Vec<serde_json::Value> = self
            .state
            .drones
            .iter()
            .map(|d| {
                serde_json::json!({
                    "id": d.id,
                    "role": d.role.as_str(),
                    "x": d.position.x,
                    "y": d.position.y,
                    "z": d.position.z,
                })
            })
            .collect();
        serde_json::Value::Array(drones).to_string()
    }

    /// Classification of the current shape against the reference set for k,
    /// or null when k is outside the supported range.
    pub fn classify_json(&self) -> String {
        let k = self.state.peripheral_count();
        let result = vsepr::reference_geometries(k, GeometrySet::WithExtended)
            .ok()
            .and_then(|candidates| vsepr::classify_geometry(&self.state, &candidates).ok());
        match result {
            Some(c) => serde_json::json!({
                "best_match": c.best_match,
                "rms_angle_error": c.rms_angle_error,
                "runner_up": c.runner_up,
                "runner_up_error": c.runner_up_error,
            })
            .to_string(),
            None => "null".to_string(),
        }
    }

    /// Monte Carlo union coverage of the current configuration.
    pub fn coverage_json(&self, samples: u32, seed: u32) -> Result<String, String> {
        let estimate = coverage::swarm_coverage(
            &self.state,
            self.params.c_obs,
            samples as u64,
            seed as u64,
        )
        .map_err(|e| e.to_string())?;
        let v_max = coverage::max_volume(&vec![self.params.c_obs; self.state.drones.len()])
            .map_err(|e| e.to_string())?;
        Ok(serde_json::json!({
            "volume": estimate.volume,
            "std_error": estimate.std_error,
            "samples": estimate.samples,
            "max_volume": v_max,
            "efficiency": estimate.volume / v_max,
        })
        .to_string())
    }

    pub fn step_count(&self) -> u32 {
        self.state.step
    }

    pub fn transmission_range(&self) -> f64 {
        self.params.r_t
    }

    pub fn observation_range(&self) -> f64 {
        self.params.c_obs
    }
}

/// Reference geometry table used by the page's legend.
#[wasm_bindgen]
pub fn geometry_names() -> String {
    let mut names = Vec::new();
    for k in 2..=8usize {
        if let Ok(geoms) = vsepr::reference_geometries(k, GeometrySet::WithExtended) {
            for g in geoms {
                names.push(serde_json::json!({"k": k, "name": g.name, "standard": g.standard}));
            }
        }
    }
    serde_json::Value::Array(names).to_string()
}

/// One-shot headless run, mirroring the CLI's report (used by the demo's
/// "run to steady state" button and handy for scripting).
#[wasm_bindgen]
pub fn run_report_json(k: usize, cp: f64, seed: u32, coverage_samples: u32) -> Result<String, String> {
    let config = harness::ScenarioConfig {
        k_peripheral: k,
        cp,
        overrides: harness::ParamOverrides {
            seed: Some(seed as u64),
            ..Default::default()
        },
        coverage_samples: coverage_samples as u64,
        ..harness::ScenarioConfig::default()
    };
    let outcome = harness::run_scenario(&config).map_err(|e| e.to_string())?;
    Ok(harness::report_json(&outcome.report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swarm_ticks_to_steady_state() {
        let mut swarm = Swarm::new(4, 40.0, 1).unwrap();
        let status = swarm.tick(2000);
        let value: serde_json::Value = serde_json::from_str(&status).unwrap();
        assert_eq!(value["converged"], serde_json::json!(true));
        assert_eq!(value["connectivity_lost"], serde_json::Value::Null);
        assert_eq!(value["fully_connected"], serde_json::json!(true));
    }

    #[test]
    fn positions_have_one_central_drone() {
        let swarm = Swarm::new(3, 40.0, 2).unwrap();
        let value: serde_json::Value =
            serde_json::from_str(&swarm.positions_json()).unwrap();
        let drones = value.as_array().unwrap();
        assert_eq!(drones.len(), 4);
        let centrals = drones.iter().filter(|d| d["role"] == "central").count();
        assert_eq!(centrals, 1);
    }

    #[test]
    fn classification_appears_after_convergence() {
        let mut swarm = Swarm::new(4, 40.0, 1).unwrap();
        swarm.tick(2000);
        let value: serde_json::Value =
            serde_json::from_str(&swarm.classify_json()).unwrap();
        assert_eq!(value["best_match"], serde_json::json!("tetrahedral"));
    }

    #[test]
    fn coverage_reports_efficiency_in_unit_interval() {
        let mut swarm = Swarm::new(5, 40.0, 3).unwrap();
        swarm.tick(2000);
        let text = swarm.coverage_json(50_000, 7).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let eff = value["efficiency"].as_f64().unwrap();
        assert!(eff > 0.0 && eff <= 1.0);
    }

    #[test]
    fn zero_k_is_an_error() {
        assert!(Swarm::new(0, 40.0, 1).is_err());
    }

    #[test]
    fn run_report_matches_harness_output() {
        let text = run_report_json(3, 40.0, 1, 20_000).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["converged"], serde_json::json!(true));
        assert!(value["display"].is_object());
    }

    #[test]
    fn geometry_names_cover_supported_ks() {
        let value: serde_json::Value = serde_json::from_str(&geometry_names()).unwrap();
        assert_eq!(value.as_array().unwrap().len(), 9);
    }
}
