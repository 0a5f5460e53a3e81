//! Ground-truth oracles: exact obstacle distance and a dense voxel grid used
//! to cross-check it.

use rmrp_core::geometry::{Aabb, Point3};

use crate::scene::Scene;

/// Exact unsigned distance to the union of obstacles (0 inside).
pub fn brute_force_esdf(scene: &Scene, x: &[f64]) -> f64 {
    scene.distance(x)
}

/// Dense occupancy grid over a region; a voxel is occupied when its center
/// lies inside an obstacle.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    region: Aabb,
    pitch: f64,
    dims: [usize; 3],
    occupied: Vec<bool>,
}

impl VoxelGrid {
    pub fn build(scene: &Scene, region: &Aabb, pitch: f64) -> Self {
        let dims = Self::dims_for(region, pitch);
        let mut occupied = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for c in region.grid_centers(pitch) {
            occupied.push(scene.is_occupied(&c));
        }
        Self {
            region: *region,
            pitch,
            dims,
            occupied,
        }
    }

    fn dims_for(region: &Aabb, pitch: f64) -> [usize; 3] {
        let e = region.extent();
        std::array::from_fn(|a| (e[a] / pitch).floor() as usize)
    }

    /// Number of voxels a grid of this pitch needs to cover `region`.
    pub fn cell_count(region: &Aabb, pitch: f64) -> usize {
        Self::dims_for(region, pitch).iter().product()
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn center(&self, i: usize, j: usize, k: usize) -> Point3 {
        [
            self.region.min[0] + (i as f64 + 0.5) * self.pitch,
            self.region.min[1] + (j as f64 + 0.5) * self.pitch,
            self.region.min[2] + (k as f64 + 0.5) * self.pitch,
        ]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|v| **v).count()
    }

    /// Distance from `x` to the nearest occupied voxel center, by exhaustive
    /// scan; infinite for an empty grid.
    pub fn nearest_occupied_distance(&self, x: &[f64]) -> f64 {
        let [nx, ny, nz] = self.dims;
        let mut best = f64::INFINITY;
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    if self.occupied[(i * ny + j) * nz + k] {
                        let c = self.center(i, j, k);
                        let d2 = (c[0] - x[0]).powi(2) + (c[1] - x[1]).powi(2) + (c[2] - x[2]).powi(2);
                        best = best.min(d2);
                    }
                }
            }
        }
        best.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Primitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere_scene() -> Scene {
        let mut s = Scene::new("s", 0, Aabb::new([-5.0; 3], [5.0; 3]));
        s.obstacles.push(Primitive::Sphere {
            center: [0.0; 3],
            radius: 1.0,
        });
        s
    }

    #[test]
    fn sphere_distances() {
        let s = sphere_scene();
        assert!(brute_force_esdf(&s, &[1.0, 0.0, 0.0]).abs() < 1e-15);
        assert!((brute_force_esdf(&s, &[5.0, 0.0, 0.0]) - 4.0).abs() < 1e-15);
        assert_eq!(brute_force_esdf(&s, &[0.2, 0.1, 0.0]), 0.0);
    }

    #[test]
    fn voxel_grid_agrees_within_diagonal() {
        let mut s = sphere_scene();
        s.obstacles.push(Primitive::Box {
            min: [0.5, -1.5, -0.5],
            max: [1.4, -0.9, 0.3],
        });
        let pitch = 0.05;
        let region = Aabb::new([-1.5; 3], [1.5; 3]);
        let grid = VoxelGrid::build(&s, &region, pitch);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x: Point3 = std::array::from_fn(|_| -1.4 + 2.8 * rng.random::<f64>());
            if s.is_occupied(&x) {
                continue;
            }
            let exact = brute_force_esdf(&s, &x);
            let voxel = grid.nearest_occupied_distance(&x);
            assert!((exact - voxel).abs() <= pitch * 3f64.sqrt(), "{exact} vs {voxel}");
        }
    }

    #[test]
    fn cell_count_scales_with_volume() {
        let a = Aabb::new([0.0; 3], [1.0; 3]);
        assert_eq!(VoxelGrid::cell_count(&a, 0.05), 8000);
    }
}
