//! Canonical reference geometries (the standard set plus known alternatives),
//! the angle-spectrum fingerprint, swarm classification, and the
//! exact-placement coverage baseline.
//!
//! The fingerprint of a configuration is the sorted multiset of central
//! angles between all peripheral pairs: invariant under rotation and under
//! uniform scaling of hub distances, and it separates every geometry in the
//! supported set (k = 2..=8).

use crate::coverage::{self, CoverageEstimate};
use crate::error::{Error, Result};
use crate::swarm::SwarmState;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{SQRT_2, TAU};

/// A named geometry: unit directions from the hub plus its angle spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGeometry {
    pub name: &'static str,
    pub k: usize,
    pub directions: Vec<Vec3>,
    /// Sorted pairwise central angles, degrees.
    pub angle_spectrum: Vec<f64>,
    /// Whether this is the standard geometry for its k.
    pub standard: bool,
}

/// Which geometries to return for a given k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometrySet {
    /// The standard geometry only.
    Standard,
    /// The standard geometry plus encoded alternatives, standard first.
    WithExtended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub best_match: String,
    /// RMS difference between the sorted spectra, degrees.
    pub rms_angle_error: f64,
    pub runner_up: Option<String>,
    pub runner_up_error: Option<f64>,
}

fn unit(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z).normalized().expect("nonzero direction")
}

fn polygon_ring(sides: usize, z: f64, radius: f64, phase: f64) -> Vec<Vec3> {
    (0..sides)
        .map(|i| {
            let theta = TAU * i as f64 / sides as f64 + phase;
            unit(radius * theta.cos(), radius * theta.sin(), z)
        })
        .collect()
}

fn geometry(name: &'static str, standard: bool, directions: Vec<Vec3>) -> ReferenceGeometry {
    let spectrum = spectrum_of(&directions);
    ReferenceGeometry {
        name,
        k: directions.len(),
        directions,
        angle_spectrum: spectrum,
        standard,
    }
}

fn spectrum_of(directions: &[Vec3]) -> Vec<f64> {
    let mut spectrum = Vec::with_capacity(directions.len() * (directions.len() - 1) / 2);
    for i in 0..directions.len() {
        for j in (i + 1)..directions.len() {
            spectrum.push(directions[i].angle_deg(&directions[j]));
        }
    }
    spectrum.sort_by(|a, b| a.partial_cmp(b).expect("angles are finite"));
    spectrum
}

fn octahedron() -> Vec<Vec3> {
    vec![
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(-1.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.0, 0.0, -1.0),
    ]
}

/// Reference geometries for a peripheral count, standard geometry first.
pub fn reference_geometries(k: usize, set: GeometrySet) -> Result<Vec<ReferenceGeometry>> {
    let mut out = Vec::new();
    match k {
        2 => out.push(geometry(
            "linear",
            true,
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
        )),
        3 => out.push(geometry(
            "trigonal-planar",
            true,
            polygon_ring(3, 0.0, 1.0, 0.0),
        )),
        4 => out.push(geometry(
            "tetrahedral",
            true,
            vec![
                unit(1.0, 1.0, 1.0),
                unit(1.0, -1.0, -1.0),
                unit(-1.0, 1.0, -1.0),
                unit(-1.0, -1.0, 1.0),
            ],
        )),
        5 => {
            let mut dirs = polygon_ring(3, 0.0, 1.0, 0.0);
            dirs.push(Vec3::new(0.0, 0.0, 1.0));
            dirs.push(Vec3::new(0.0, 0.0, -1.0));
            out.push(geometry("trigonal-bipyramidal", true, dirs));

            let mut pyramid = polygon_ring(4, 0.0, 1.0, 0.0);
            pyramid.push(Vec3::new(0.0, 0.0, 1.0));
            out.push(geometry("square-pyramidal", false, pyramid));
        }
        6 => out.push(geometry("octahedral", true, octahedron())),
        7 => {
            let mut dirs = polygon_ring(5, 0.0, 1.0, 0.0);
            dirs.push(Vec3::new(0.0, 0.0, 1.0));
            dirs.push(Vec3::new(0.0, 0.0, -1.0));
            out.push(geometry("pentagonal-bipyramidal", true, dirs));

            let mut capped = octahedron();
            capped.push(unit(1.0, 1.0, 1.0));
            out.push(geometry("capped-octahedral", false, capped));
        }
        8 => {
            // Ideal square antiprism (all edges equal) inscribed in the unit
            // sphere: ring radius rho with rho^2 (1 + sqrt(2)/4) = 1.
            let rho = (1.0 / (1.0 + SQRT_2 / 4.0)).sqrt();
            let h = rho * SQRT_2.sqrt() / 2.0;
            let mut dirs = polygon_ring(4, h, rho, 0.0);
            dirs.extend(polygon_ring(4, -h, rho, TAU / 8.0));
            out.push(geometry("square-antiprismatic", true, dirs));
        }
        _ => return Err(Error::UnsupportedK(k)),
    }
    if set == GeometrySet::Standard {
        out.truncate(1);
    }
    Ok(out)
}

/// Sorted central angles between every peripheral pair, degrees.
pub fn angle_spectrum(state: &SwarmState) -> Result<Vec<f64>> {
    let central = state.central()?;
    let mut directions = Vec::new();
    for d in state.peripherals() {
        let offset = d.position - central.position;
        if offset.norm() == 0.0 {
            return Err(Error::DegenerateDirection(d.id));
        }
        directions.push(offset);
    }
    if directions.len() < 2 {
        return Err(Error::Parameter(
            "angle spectrum needs at least 2 peripheral drones".into(),
        ));
    }
    Ok(spectrum_of(&directions))
}

/// Ratio of the largest to the smallest hub distance over peripherals.
/// 1.0 means a perfectly uniform shell.
pub fn radial_uniformity(state: &SwarmState) -> Result<f64> {
    let central = state.central()?;
    let mut min = f64::INFINITY;
    let mut max: f64 = 0.0;
    let mut any = false;
    for d in state.peripherals() {
        let dist = d.position.distance(&central.position);
        if dist == 0.0 {
            return Err(Error::DegenerateDirection(d.id));
        }
        min = min.min(dist);
        max = max.max(dist);
        any = true;
    }
    if !any {
        return Err(Error::NoPeripherals);
    }
    Ok(max / min)
}

/// Picks the candidate whose sorted spectrum is closest (element-wise RMS) to
/// the state's spectrum; ties resolve toward the standard geometry because it
/// is listed first.
pub fn classify_geometry(
    state: &SwarmState,
    candidates: &[ReferenceGeometry],
) -> Result<ClassificationResult> {
    if candidates.is_empty() {
        return Err(Error::Parameter("no candidate geometries supplied".into()));
    }
    let k = state.peripheral_count();
    if candidates.iter().any(|c| c.k != k) {
        return Err(Error::Parameter(format!(
            "candidate peripheral count does not match state (k = {k})"
        )));
    }

    let spectrum = angle_spectrum(state)?;
    let mut scored: Vec<(&ReferenceGeometry, f64)> = candidates
        .iter()
        .map(|c| (c, rms_diff(&spectrum, &c.angle_spectrum)))
        .collect();
    // Stable sort keeps the standard-first candidate order on exact ties.
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite rms"));

    let (best, best_err) = scored[0];
    let runner = scored.get(1);
    Ok(ClassificationResult {
        best_match: best.name.to_string(),
        rms_angle_error: best_err,
        runner_up: runner.map(|(g, _)| g.name.to_string()),
        runner_up_error: runner.map(|&(_, e)| e),
    })
}

fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (sum / a.len() as f64).sqrt()
}

/// Coverage of the exact standard placement: hub at the origin and k
/// peripherals at `distance` along the reference directions. This is the
/// internal stand-in used by the baseline comparison; it is not a
/// reimplementation of any external deployment system.
pub fn baseline_coverage(
    k: usize,
    distance: f64,
    c_obs: f64,
    samples: u64,
    seed: u64,
) -> Result<CoverageEstimate> {
    if distance < 0.0 {
        return Err(Error::Parameter("distance must be >= 0".into()));
    }
    let standard = reference_geometries(k, GeometrySet::Standard)?;
    let mut centers = vec![Vec3::ZERO];
    centers.extend(standard[0].directions.iter().map(|&d| d * distance));
    let radii = vec![c_obs; centers.len()];
    coverage::union_volume_mc(&centers, &radii, samples, seed)
}

/// Plain-text table of every encoded geometry: name, k, unit vectors.
pub fn geometry_table() -> String {
    let mut out = String::from("name k directions\n");
    for k in 2..=8 {
        for g in reference_geometries(k, GeometrySet::WithExtended).expect("supported k") {
            let dirs: Vec<String> = g
                .directions
                .iter()
                .map(|d| format!("({:.6},{:.6},{:.6})", d.x, d.y, d.z))
                .collect();
            out.push_str(&format!("{} {} {}\n", g.name, g.k, dirs.join(" ")));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::{DroneRole, DroneState};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn state_from_dirs(dirs: &[Vec3], scale: f64) -> SwarmState {
        let mut drones = vec![DroneState {
            id: 0,
            role: DroneRole::Central,
            position: Vec3::ZERO,
            velocity: Vec3::ZERO,
        }];
        drones.extend(dirs.iter().enumerate().map(|(i, &d)| DroneState {
            id: i as u32 + 1,
            role: DroneRole::Peripheral,
            position: d * scale,
            velocity: Vec3::ZERO,
        }));
        SwarmState { step: 0, drones }
    }

    #[test]
    fn all_reference_directions_are_unit_norm() {
        for k in 2..=8 {
            for g in reference_geometries(k, GeometrySet::WithExtended).unwrap() {
                assert_eq!(g.k, k);
                assert_eq!(g.directions.len(), k);
                assert_eq!(g.angle_spectrum.len(), k * (k - 1) / 2);
                for d in &g.directions {
                    assert!((d.norm() - 1.0).abs() < 1e-9, "{} not unit", g.name);
                }
                for w in g.angle_spectrum.windows(2) {
                    assert!(w[0] <= w[1], "{} spectrum unsorted", g.name);
                }
                for &a in &g.angle_spectrum {
                    assert!(a > 0.0 && a <= 180.0, "{} angle {a} out of range", g.name);
                }
            }
        }
    }

    #[test]
    fn unsupported_k_is_an_error() {
        assert_eq!(
            reference_geometries(1, GeometrySet::Standard),
            Err(Error::UnsupportedK(1))
        );
        assert_eq!(
            reference_geometries(9, GeometrySet::Standard),
            Err(Error::UnsupportedK(9))
        );
    }

    #[test]
    fn linear_spectrum_is_one_straight_angle() {
        let g = &reference_geometries(2, GeometrySet::Standard).unwrap()[0];
        assert_eq!(g.name, "linear");
        assert_eq!(g.angle_spectrum.len(), 1);
        assert_relative_eq!(g.angle_spectrum[0], 180.0, max_relative = 1e-12);
    }

    #[test]
    fn tetrahedral_angles_are_all_109_47() {
        let g = &reference_geometries(4, GeometrySet::Standard).unwrap()[0];
        let expected = (-1.0_f64 / 3.0).acos().to_degrees();
        for &a in &g.angle_spectrum {
            assert_relative_eq!(a, expected, max_relative = 1e-9);
        }
        assert_relative_eq!(expected, 109.4712206, max_relative = 1e-8);
    }

    #[test]
    fn octahedral_spectrum_is_twelve_right_angles_and_three_straight() {
        let g = &reference_geometries(6, GeometrySet::Standard).unwrap()[0];
        let right = g.angle_spectrum.iter().filter(|&&a| (a - 90.0).abs() < 1e-9).count();
        let straight = g
            .angle_spectrum
            .iter()
            .filter(|&&a| (a - 180.0).abs() < 1e-9)
            .count();
        assert_eq!((right, straight), (12, 3));
    }

    #[test]
    fn antipodal_pair_spectrum() {
        let s = state_from_dirs(
            &[Vec3::new(1.0, 0.0, 0.0), Vec3::new(-1.0, 0.0, 0.0)],
            12.0,
        );
        let spec = angle_spectrum(&s).unwrap();
        assert_eq!(spec.len(), 1);
        assert_relative_eq!(spec[0], 180.0, max_relative = 1e-12);
    }

    #[test]
    fn planar_120_degree_spacing() {
        let dirs = polygon_ring(3, 0.0, 1.0, 0.3);
        let s = state_from_dirs(&dirs, 8.0);
        for a in angle_spectrum(&s).unwrap() {
            assert_relative_eq!(a, 120.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn spectrum_is_scale_invariant() {
        let dirs = reference_geometries(5, GeometrySet::Standard).unwrap()[0]
            .directions
            .clone();
        let small = angle_spectrum(&state_from_dirs(&dirs, 2.0)).unwrap();
        let large = angle_spectrum(&state_from_dirs(&dirs, 97.5)).unwrap();
        for (a, b) in small.iter().zip(&large) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn coincident_peripheral_is_degenerate() {
        let mut s = state_from_dirs(&[Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)], 5.0);
        s.drones[2].position = Vec3::ZERO;
        assert_eq!(angle_spectrum(&s), Err(Error::DegenerateDirection(2)));
    }

    #[test]
    fn exact_tetrahedron_classifies_perfectly() {
        let candidates = reference_geometries(4, GeometrySet::WithExtended).unwrap();
        let s = state_from_dirs(&candidates[0].directions, 10.0);
        let result = classify_geometry(&s, &candidates).unwrap();
        assert_eq!(result.best_match, "tetrahedral");
        assert!(result.rms_angle_error < 1e-6);
    }

    #[test]
    fn perturbed_tetrahedron_still_classifies() {
        let candidates = reference_geometries(4, GeometrySet::WithExtended).unwrap();
        // Tilt each direction by a fixed ~1 degree twist about z.
        let eps = 1.0_f64.to_radians();
        let dirs: Vec<Vec3> = candidates[0]
            .directions
            .iter()
            .map(|d| {
                Vec3::new(
                    d.x * eps.cos() - d.y * eps.sin(),
                    d.x * eps.sin() + d.y * eps.cos(),
                    d.z + 0.01,
                )
                .normalized()
                .unwrap()
            })
            .collect();
        let s = state_from_dirs(&dirs, 10.0);
        let result = classify_geometry(&s, &candidates).unwrap();
        assert_eq!(result.best_match, "tetrahedral");
        assert!(
            result.rms_angle_error <= 2.0,
            "rms {} too large",
            result.rms_angle_error
        );
    }

    #[test]
    fn square_pyramid_beats_trigonal_bipyramid_on_its_own_placement() {
        let candidates = reference_geometries(5, GeometrySet::WithExtended).unwrap();
        let pyramid = candidates.iter().find(|g| g.name == "square-pyramidal").unwrap();
        let s = state_from_dirs(&pyramid.directions, 15.0);
        let result = classify_geometry(&s, &candidates).unwrap();
        assert_eq!(result.best_match, "square-pyramidal");
        assert!(result.rms_angle_error < 1e-9);
        assert_eq!(result.runner_up.as_deref(), Some("trigonal-bipyramidal"));
        assert!(result.runner_up_error.unwrap() > result.rms_angle_error);
    }

    #[test]
    fn every_reference_self_classifies() {
        for k in 2..=8 {
            let candidates = reference_geometries(k, GeometrySet::WithExtended).unwrap();
            for g in &candidates {
                let s = state_from_dirs(&g.directions, 20.0);
                let result = classify_geometry(&s, &candidates).unwrap();
                assert_eq!(result.best_match, g.name);
                assert!(result.rms_angle_error < 1e-6);
            }
        }
    }

    #[test]
    fn k_mismatch_is_rejected() {
        let candidates = reference_geometries(4, GeometrySet::WithExtended).unwrap();
        let dirs = reference_geometries(3, GeometrySet::Standard).unwrap()[0]
            .directions
            .clone();
        let s = state_from_dirs(&dirs, 10.0);
        assert!(classify_geometry(&s, &candidates).is_err());
    }

    #[test]
    fn baseline_with_disjoint_spheres_hits_max_volume() {
        let est = baseline_coverage(4, 100.0, 40.0, 400_000, 9).unwrap();
        let vm = coverage::max_volume(&[40.0; 5]).unwrap();
        assert!(
            (est.volume - vm).abs() <= (3.0 * est.std_error).max(0.01 * vm),
            "union {} vs max {}",
            est.volume,
            vm
        );
    }

    #[test]
    fn baseline_at_zero_distance_is_one_sphere() {
        let est = baseline_coverage(5, 0.0, 40.0, 200_000, 9).unwrap();
        let single = 4.0 / 3.0 * std::f64::consts::PI * 40.0_f64.powi(3);
        assert!((est.volume - single).abs() <= (3.0 * est.std_error).max(0.01 * single));
    }

    #[test]
    fn collinear_baseline_matches_inclusion_exclusion() {
        // k = 2 places spheres at -d, 0, +d on one axis. For d <= R the
        // outer pair's lens is contained in the middle sphere, so
        // union = 3V - 2 lens(d).
        let (d, r): (f64, f64) = (40.0, 40.0);
        let v = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
        let lens_d = 2.0 * v - coverage::two_sphere_union_exact(r, r, d).unwrap();
        let exact = 3.0 * v - 2.0 * lens_d;
        let est = baseline_coverage(2, d, r, 1_000_000, 13).unwrap();
        assert!(
            (est.volume - exact).abs() <= (3.0 * est.std_error).max(0.01 * exact),
            "union {} vs exact {}",
            est.volume,
            exact
        );
    }

    #[test]
    fn radial_uniformity_of_a_shell_is_one() {
        let dirs = reference_geometries(6, GeometrySet::Standard).unwrap()[0]
            .directions
            .clone();
        let s = state_from_dirs(&dirs, 25.0);
        assert_relative_eq!(radial_uniformity(&s).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn geometry_table_lists_every_geometry() {
        let table = geometry_table();
        for name in [
            "linear",
            "trigonal-planar",
            "tetrahedral",
            "trigonal-bipyramidal",
            "square-pyramidal",
            "octahedral",
            "pentagonal-bipyramidal",
            "capped-octahedral",
            "square-antiprismatic",
        ] {
            assert!(table.contains(name), "missing {name}");
        }
    }

    #[test]
    fn frac_1_sqrt_2_matches_ring_construction() {
        // Pin the polygon_ring convention: a 4-ring at phase pi/4 starts at
        // (1/sqrt2, 1/sqrt2, 0).
        let ring = polygon_ring(4, 0.0, 1.0, TAU / 8.0);
        assert_relative_eq!(ring[0].x, FRAC_1_SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(ring[0].y, FRAC_1_SQRT_2, max_relative = 1e-12);
    }
}
