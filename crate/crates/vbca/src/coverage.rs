//! Volume coverage: theoretical maximum, analytic two-sphere union, and
//! Monte Carlo union-of-spheres estimation.

use crate::error::{Error, Result};
use crate::swarm::SwarmState;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples are drawn in fixed-size substreams so the estimate is identical
/// however the chunks are scheduled.
const CHUNK: u64 = 1 << 16;

/// Monte Carlo union-volume estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    /// Estimated union volume, m^3.
    pub volume: f64,
    /// Binomial standard error of the estimate, m^3.
    pub std_error: f64,
    pub samples: u64,
    /// Tight axis-aligned bounding box of the sampled spheres.
    pub bounding_box: (Vec3, Vec3),
}

/// Theoretical maximum coverage: the sum of full sphere volumes, ignoring
/// any overlap.
pub fn max_volume(observation_ranges: &[f64]) -> Result<f64> {
    if observation_ranges.is_empty() {
        return Err(Error::Parameter("observation range list is empty".into()));
    }
    if observation_ranges.iter().any(|&c| c <= 0.0) {
        return Err(Error::Parameter("observation ranges must be > 0".into()));
    }
    Ok(observation_ranges
        .iter()
        .map(|&c| 4.0 / 3.0 * PI * c.powi(3))
        .sum())
}

/// Exact union volume of two spheres via the spherical-lens formula.
///
/// Serves as the independent oracle for the Monte Carlo estimator.
pub fn two_sphere_union_exact(r1: f64, r2: f64, d: f64) -> Result<f64> {
    if r1 <= 0.0 || r2 <= 0.0 {
        return Err(Error::Parameter("sphere radii must be > 0".into()));
    }
    if d < 0.0 {
        return Err(Error::Parameter("center distance must be >= 0".into()));
    }
    let vol = |r: f64| 4.0 / 3.0 * PI * r.powi(3);
    if d >= r1 + r2 {
        return Ok(vol(r1) + vol(r2));
    }
    if d <= (r1 - r2).abs() {
        return Ok(vol(r1.max(r2)));
    }
    let lens = PI
        * (r1 + r2 - d).powi(2)
        * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2))
        / (12.0 * d);
    Ok(vol(r1) + vol(r2) - lens)
}

/// Rejection-sampling estimate of the union volume of arbitrary spheres.
///
/// Uniform points are drawn over the tight bounding box of all spheres;
/// `volume = box_volume * hit_fraction`. Deterministic in `seed`: samples are
/// generated in fixed 2^16-sample substreams keyed on `(seed, chunk index)`,
/// so partitioning the work differently cannot change the result.
pub fn union_volume_mc(
    centers: &[Vec3],
    radii: &[f64],
    samples: u64,
    seed: u64,
) -> Result<CoverageEstimate> {
    if centers.len() != radii.len() {
        return Err(Error::Parameter(
            "centers and radii must have equal length".into(),
        ));
    }
    if centers.is_empty() {
        return Err(Error::Parameter("sphere list is empty".into()));
    }
    if radii.iter().any(|&r| r <= 0.0) {
        return Err(Error::Parameter("sphere radii must be > 0".into()));
    }
    if samples < 1000 {
        return Err(Error::Parameter("samples must be >= 1000".into()));
    }

    let (lo, hi) = bounding_box(centers, radii);
    let extent = hi - lo;
    let box_volume = extent.x * extent.y * extent.z;

    let radii_sq: Vec<f64> = radii.iter().map(|&r| r * r).collect();
    let n_chunks = samples.div_ceil(CHUNK);
    let mut hits: u64 = 0;
    for chunk in 0..n_chunks {
        let chunk_samples = CHUNK.min(samples - chunk * CHUNK);
        hits += sample_chunk(
            substream_seed(seed, chunk),
            chunk_samples,
            lo,
            extent,
            centers,
            &radii_sq,
        );
    }

    let p = hits as f64 / samples as f64;
    Ok(CoverageEstimate {
        volume: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        bounding_box: (lo, hi),
    })
}

/// Union coverage of the whole swarm with a uniform sensing radius,
/// central drone included.
pub fn swarm_coverage(
    state: &SwarmState,
    c_obs: f64,
    samples: u64,
    seed: u64,
) -> Result<CoverageEstimate> {
    let centers: Vec<Vec3> = state.drones.iter().map(|d| d.position).collect();
    let radii = vec![c_obs; centers.len()];
    union_volume_mc(&centers, &radii, samples, seed)
}

fn bounding_box(centers: &[Vec3], radii: &[f64]) -> (Vec3, Vec3) {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (c, &r) in centers.iter().zip(radii) {
        lo.x = lo.x.min(c.x - r);
        lo.y = lo.y.min(c.y - r);
        lo.z = lo.z.min(c.z - r);
        hi.x = hi.x.max(c.x + r);
        hi.y = hi.y.max(c.y + r);
        hi.z = hi.z.max(c.z + r);
    }
    (lo, hi)
}

fn sample_chunk(
    seed: u64,
    samples: u64,
    lo: Vec3,
    extent: Vec3,
    centers: &[Vec3],
    radii_sq: &[f64],
) -> u64 {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let p = Vec3::new(
            lo.x + rng.gen::<f64>() * extent.x,
            lo.y + rng.gen::<f64>() * extent.y,
            lo.z + rng.gen::<f64>() * extent.z,
        );
        let inside = centers
            .iter()
            .zip(radii_sq)
            .any(|(c, &r2)| (p - *c).norm_squared() <= r2);
        if inside {
            hits += 1;
        }
    }
    hits
}

/// SplitMix64 mix of the user seed with a chunk index.
fn substream_seed(seed: u64, chunk: u64) -> u64 {
    let mut z = seed ^ chunk.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SPHERE_40: f64 = 268_082.573_106_329; // 4/3 pi 40^3

    #[test]
    fn unit_sphere_max_volume() {
        assert_relative_eq!(max_volume(&[1.0]).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn max_volume_of_three_equal_spheres() {
        assert_relative_eq!(
            max_volume(&[40.0, 40.0, 40.0]).unwrap(),
            804_247.719_318_987,
            max_relative = 1e-9
        );
    }

    #[test]
    fn max_volume_is_additive() {
        assert_relative_eq!(
            max_volume(&[1.0, 2.0]).unwrap(),
            12.0 * PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn max_volume_rejects_bad_input() {
        assert!(max_volume(&[]).is_err());
        assert!(max_volume(&[40.0, 0.0]).is_err());
    }

    #[test]
    fn coincident_spheres_union_is_one_sphere() {
        assert_relative_eq!(
            two_sphere_union_exact(40.0, 40.0, 0.0).unwrap(),
            SPHERE_40,
            max_relative = 1e-9
        );
    }

    #[test]
    fn tangent_spheres_union_is_the_sum() {
        assert_relative_eq!(
            two_sphere_union_exact(40.0, 40.0, 80.0).unwrap(),
            2.0 * SPHERE_40,
            max_relative = 1e-9
        );
    }

    #[test]
    fn half_overlapping_spheres_match_the_lens_formula() {
        // 2 * (4/3) pi 40^3 - pi * 40^2 * (40^2 + 2*40*80) / (12*40)
        assert_relative_eq!(
            two_sphere_union_exact(40.0, 40.0, 40.0).unwrap(),
            452_389.342_116_93,
            max_relative = 1e-9
        );
    }

    #[test]
    fn contained_sphere_adds_nothing() {
        assert_relative_eq!(
            two_sphere_union_exact(40.0, 10.0, 5.0).unwrap(),
            SPHERE_40,
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_sphere_mc_within_one_percent() {
        let est = union_volume_mc(&[Vec3::ZERO], &[40.0], 1_000_000, 7).unwrap();
        assert!((est.volume - SPHERE_40).abs() < 0.01 * SPHERE_40);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn mc_matches_the_two_sphere_oracle() {
        let exact = two_sphere_union_exact(40.0, 40.0, 40.0).unwrap();
        let est = union_volume_mc(
            &[Vec3::ZERO, Vec3::new(40.0, 0.0, 0.0)],
            &[40.0, 40.0],
            1_000_000,
            11,
        )
        .unwrap();
        assert!(
            (est.volume - exact).abs() <= 3.0 * est.std_error,
            "estimate {} vs exact {} (3se = {})",
            est.volume,
            exact,
            3.0 * est.std_error
        );
    }

    #[test]
    fn duplicated_sphere_changes_nothing() {
        let single = union_volume_mc(&[Vec3::ZERO], &[40.0], 100_000, 3).unwrap();
        let doubled =
            union_volume_mc(&[Vec3::ZERO, Vec3::ZERO], &[40.0, 40.0], 100_000, 3).unwrap();
        assert_eq!(single.volume, doubled.volume);
    }

    #[test]
    fn estimates_are_deterministic_in_seed() {
        let a = union_volume_mc(&[Vec3::ZERO], &[40.0], 50_000, 123).unwrap();
        let b = union_volume_mc(&[Vec3::ZERO], &[40.0], 50_000, 123).unwrap();
        assert_eq!(a, b);
        let c = union_volume_mc(&[Vec3::ZERO], &[40.0], 50_000, 124).unwrap();
        assert_ne!(a.volume, c.volume);
    }

    #[test]
    fn mc_rejects_bad_input() {
        assert!(union_volume_mc(&[Vec3::ZERO], &[40.0, 1.0], 10_000, 0).is_err());
        assert!(union_volume_mc(&[Vec3::ZERO], &[40.0], 10, 0).is_err());
        assert!(union_volume_mc(&[], &[], 10_000, 0).is_err());
    }

    #[test]
    fn colocated_swarm_covers_one_sphere() {
        let state = SwarmState {
            step: 0,
            drones: (0..4)
                .map(|i| crate::swarm::DroneState {
                    id: i,
                    role: if i == 0 {
                        crate::swarm::DroneRole::Central
                    } else {
                        crate::swarm::DroneRole::Peripheral
                    },
                    position: Vec3::ZERO,
                    velocity: Vec3::ZERO,
                })
                .collect(),
        };
        let est = swarm_coverage(&state, 40.0, 200_000, 5).unwrap();
        assert!((est.volume - SPHERE_40).abs() <= 3.0 * est.std_error.max(0.01 * SPHERE_40));
    }

    #[test]
    fn union_is_invariant_under_rigid_motion() {
        let centers = [Vec3::ZERO, Vec3::new(30.0, 10.0, -5.0), Vec3::new(-20.0, 25.0, 15.0)];
        let radii = [40.0, 40.0, 40.0];
        let base = union_volume_mc(&centers, &radii, 400_000, 21).unwrap();

        // Translate and rotate 90 degrees about z; distances are preserved.
        let moved: Vec<Vec3> = centers
            .iter()
            .map(|c| Vec3::new(-c.y + 100.0, c.x - 40.0, c.z + 7.0))
            .collect();
        let shifted = union_volume_mc(&moved, &radii, 400_000, 21).unwrap();
        assert!(
            (base.volume - shifted.volume).abs() <= 3.0 * (base.std_error + shifted.std_error),
            "union changed under rigid motion: {} vs {}",
            base.volume,
            shifted.volume
        );
    }

    #[test]
    fn adding_a_sphere_never_shrinks_the_union() {
        let mut centers = vec![Vec3::ZERO, Vec3::new(35.0, 0.0, 0.0)];
        let mut radii = vec![40.0, 40.0];
        let before = union_volume_mc(&centers, &radii, 400_000, 8).unwrap();
        centers.push(Vec3::new(0.0, 30.0, 20.0));
        radii.push(40.0);
        let after = union_volume_mc(&centers, &radii, 400_000, 8).unwrap();
        assert!(
            after.volume >= before.volume - 3.0 * (before.std_error + after.std_error),
            "union shrank from {} to {}",
            before.volume,
            after.volume
        );
    }

    #[test]
    fn union_never_exceeds_max_volume() {
        let centers = [Vec3::ZERO, Vec3::new(10.0, 5.0, 0.0), Vec3::new(-8.0, 0.0, 12.0)];
        let radii = [40.0, 40.0, 40.0];
        let est = union_volume_mc(&centers, &radii, 300_000, 4).unwrap();
        let vm = max_volume(&radii).unwrap();
        assert!(est.volume > 0.0);
        assert!(est.volume <= vm + 3.0 * est.std_error);
    }

    #[test]
    fn wider_spacing_covers_more_volume() {
        // Same swarm size and seed; only the compactness differs.
        let run = |cp: f64| {
            let params = crate::swarm::SwarmParams {
                seed: 9,
                ..crate::swarm::SwarmParams::for_cp(cp)
            };
            let initial = crate::swarm::initialize(7, &params).unwrap();
            let (final_state, _, converged) =
                crate::forces::run_to_steady_state(initial, &params).unwrap();
            assert!(converged);
            swarm_coverage(&final_state, params.c_obs, 300_000, 11).unwrap()
        };
        let tight = run(10.0);
        let wide = run(50.0);
        assert!(
            wide.volume > tight.volume,
            "cp=50 coverage {} not above cp=10 coverage {}",
            wide.volume,
            tight.volume
        );
    }

    #[test]
    fn disjoint_swarm_reaches_max_volume() {
        let state = SwarmState {
            step: 0,
            drones: vec![
                crate::swarm::DroneState {
                    id: 0,
                    role: crate::swarm::DroneRole::Central,
                    position: Vec3::ZERO,
                    velocity: Vec3::ZERO,
                },
                crate::swarm::DroneState {
                    id: 1,
                    role: crate::swarm::DroneRole::Peripheral,
                    position: Vec3::new(200.0, 0.0, 0.0),
                    velocity: Vec3::ZERO,
                },
                crate::swarm::DroneState {
                    id: 2,
                    role: crate::swarm::DroneRole::Peripheral,
                    position: Vec3::new(0.0, 200.0, 0.0),
                    velocity: Vec3::ZERO,
                },
            ],
        };
        let est = swarm_coverage(&state, 40.0, 1_000_000, 5).unwrap();
        let vm = max_volume(&[40.0, 40.0, 40.0]).unwrap();
        assert!(
            (est.volume - vm).abs() <= (3.0 * est.std_error).max(0.01 * vm),
            "union {} vs max {}",
            est.volume,
            vm
        );
    }
}
