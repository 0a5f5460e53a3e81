//! Simulated range sensing and labelled sample sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmrp_core::field::TrainingSet;
use rmrp_core::geometry::{Aabb, Point3};
use serde::{Deserialize, Serialize};

use crate::oracle::brute_force_esdf;
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub position: Point3,
    /// `0` free, `1` occupied (scans); a distance or elevation otherwise.
    pub label: f64,
    pub ray: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub rays: usize,
    pub max_range: f64,
    /// Spacing of free samples along a ray.
    pub stride: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            rays: 2000,
            max_range: 10.0,
            stride: 0.1,
        }
    }
}

/// `n` near-uniform unit directions on the sphere (golden-angle spiral).
pub fn fibonacci_directions(n: usize) -> Vec<Point3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Casts `cfg.rays` rays from `pose`. Each ray yields free samples every
/// `stride` up to (not including) the first hit, then one occupied sample on
/// the hit surface. Rays stop at the scene bounds. Samples inside `mask` are
/// dropped.
pub fn simulate_scan(scene: &Scene, pose: &Point3, cfg: &ScanConfig, mask: Option<&Aabb>) -> Vec<ScanSample> {
    let mut out = Vec::new();
    for (ray, dir) in fibonacci_directions(cfg.rays).iter().enumerate() {
        let exit = exit_distance(&scene.bounds, pose, dir).min(cfg.max_range);
        let hit = scene.ray_cast(pose, dir, exit);
        let free_end = hit.unwrap_or(exit);
        let keep = |p: &Point3| mask.is_none_or(|m| !m.contains(p));
        let mut t = cfg.stride;
        while t < free_end {
            let p = along(pose, dir, t);
            if keep(&p) {
                out.push(ScanSample {
                    position: p,
                    label: 0.0,
                    ray: ray as u32,
                });
            }
            t += cfg.stride;
        }
        if let Some(th) = hit {
            let p = along(pose, dir, th);
            if keep(&p) {
                out.push(ScanSample {
                    position: p,
                    label: 1.0,
                    ray: ray as u32,
                });
            }
        }
    }
    out
}

/// Scans from several poses, concatenated in pose order.
pub fn scan_from_poses(scene: &Scene, poses: &[Point3], cfg: &ScanConfig, mask: Option<&Aabb>) -> Vec<ScanSample> {
    poses.iter().flat_map(|p| simulate_scan(scene, p, cfg, mask)).collect()
}

/// Sensor poses on a `n × n` horizontal grid at mid height, nudged off any
/// obstacle.
pub fn grid_poses(scene: &Scene, n: usize) -> Vec<Point3> {
    let b = &scene.bounds;
    let z = 0.5 * (b.min[2] + b.max[2]);
    let mut poses = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut p = [
                b.min[0] + (i as f64 + 0.5) / n as f64 * (b.max[0] - b.min[0]),
                b.min[1] + (j as f64 + 0.5) / n as f64 * (b.max[1] - b.min[1]),
                z,
            ];
            // Slide along +x until free.
            while scene.is_occupied(&p) && p[0] < b.max[0] {
                p[0] += 0.05;
            }
            if !scene.is_occupied(&p) && b.contains(&p) {
                poses.push(p);
            }
        }
    }
    poses
}

pub fn to_training_set(samples: &[ScanSample]) -> TrainingSet {
    let mut set = TrainingSet::new(3);
    for s in samples {
        set.push(&s.position, s.label).expect("finite sample");
    }
    set
}

/// Uniform points in `region` labelled by containment, skipping `mask`.
pub fn volumetric_samples(scene: &Scene, region: &Aabb, count: usize, seed: u64, mask: Option<&Aabb>) -> Vec<ScanSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = uniform_point(&mut rng, region);
        if mask.is_some_and(|m| m.contains(&p)) {
            continue;
        }
        out.push(ScanSample {
            position: p,
            label: if scene.is_occupied(&p) { 1.0 } else { 0.0 },
            ray: 0,
        });
    }
    out
}

/// Distance-labelled samples: the given positions relabelled by the exact
/// obstacle distance.
pub fn esdf_samples(scene: &Scene, positions: impl IntoIterator<Item = Point3>) -> Vec<ScanSample> {
    positions
        .into_iter()
        .map(|p| ScanSample {
            position: p,
            label: brute_force_esdf(scene, &p),
            ray: 0,
        })
        .collect()
}

/// Elevation samples at uniform `(x, y)` inside the scene footprint; `z`
/// holds the elevation too so the sample is a surface point.
pub fn terrain_samples(scene: &Scene, count: usize, seed: u64) -> Vec<ScanSample> {
    let Some(terrain) = &scene.terrain else {
        return Vec::new();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let p = uniform_point(&mut rng, &scene.bounds);
            let h = terrain.elevation(p[0], p[1]);
            ScanSample {
                position: [p[0], p[1], h],
                label: h,
                ray: 0,
            }
        })
        .collect()
}

/// Training set over the first two coordinates.
pub fn to_terrain_set(samples: &[ScanSample]) -> TrainingSet {
    let mut set = TrainingSet::new(2);
    for s in samples {
        set.push(&s.position[..2], s.label).expect("finite sample");
    }
    set
}

pub fn uniform_point(rng: &mut ChaCha8Rng, region: &Aabb) -> Point3 {
    std::array::from_fn(|a| region.min[a] + (region.max[a] - region.min[a]) * rng.random::<f64>())
}

fn along(o: &Point3, d: &Point3, t: f64) -> Point3 {
    [o[0] + t * d[0], o[1] + t * d[1], o[2] + t * d[2]]
}

/// Distance from an interior point to the box boundary along `dir`.
fn exit_distance(b: &Aabb, o: &Point3, d: &Point3) -> f64 {
    let mut t = f64::INFINITY;
    for a in 0..3 {
        if d[a] > 0.0 {
            t = t.min((b.max[a] - o[a]) / d[a]);
        } else if d[a] < 0.0 {
            t = t.min((b.min[a] - o[a]) / d[a]);
        }
    }
    t.max(0.0)
}
