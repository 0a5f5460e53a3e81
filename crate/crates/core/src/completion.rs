//! Obstacle completion: mark grid cells whose predicted occupancy score
//! exceeds a threshold. The model is never modified here.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{FieldKind, FieldScratch, ParametricField};
use crate::geometry::{Aabb, Point3};

pub type CellIndex = [i64; 3];

/// Sparse set of occupied voxels on a regular grid anchored at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyStore {
    pitch: f64,
    origin: Point3,
    cells: BTreeSet<CellIndex>,
}

impl OccupancyStore {
    pub fn new(pitch: f64, origin: Point3) -> Result<Self> {
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(invalid("pitch", format!("must be positive, got {pitch}")));
        }
        Ok(Self {
            pitch,
            origin,
            cells: BTreeSet::new(),
        })
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn cell_of(&self, p: &[f64]) -> CellIndex {
        [
            ((p[0] - self.origin[0]) / self.pitch).floor() as i64,
            ((p[1] - self.origin[1]) / self.pitch).floor() as i64,
            ((p[2] - self.origin[2]) / self.pitch).floor() as i64,
        ]
    }

    pub fn cell_center(&self, c: CellIndex) -> Point3 {
        [
            self.origin[0] + (c[0] as f64 + 0.5) * self.pitch,
            self.origin[1] + (c[1] as f64 + 0.5) * self.pitch,
            self.origin[2] + (c[2] as f64 + 0.5) * self.pitch,
        ]
    }

    /// Returns true when the cell was not yet occupied.
    pub fn mark(&mut self, c: CellIndex) -> bool {
        self.cells.insert(c)
    }

    pub fn mark_point(&mut self, p: &[f64]) -> bool {
        let c = self.cell_of(p);
        self.mark(c)
    }

    pub fn is_occupied(&self, c: CellIndex) -> bool {
        self.cells.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = &CellIndex> {
        self.cells.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionConfig {
    /// Occupancy threshold `τ`; a cell is occupied when its score is above it.
    pub threshold: f64,
    pub region: Aabb,
    pub pitch: f64,
}

impl CompletionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(invalid("threshold", "must be finite"));
        }
        if !(self.pitch > 0.0) {
            return Err(invalid("pitch", "must be positive"));
        }
        Ok(())
    }
}

/// Evaluates the occupancy field at every query-grid cell center in
/// `cfg.region` and marks those scoring above `cfg.threshold`. Returns the
/// newly occupied cells in ascending index order.
pub fn complete_blind_spots(
    field: &ParametricField,
    cfg: &CompletionConfig,
    store: &mut OccupancyStore,
) -> Result<Vec<CellIndex>> {
    field.require_kind(FieldKind::Occupancy)?;
    cfg.validate()?;
    let mut scratch = FieldScratch::for_field(field);
    let mut added = BTreeSet::new();
    for center in cfg.region.grid_centers(cfg.pitch) {
        if field.value_with(&center, &mut scratch)? > cfg.threshold {
            let c = store.cell_of(&center);
            if store.mark(c) {
                added.insert(c);
            }
        }
    }
    Ok(added.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Activation, RandomFeatureMap};
    use crate::linear::{LinearHead, Task};
    use crate::projection::FeatureProjection;

    // score(x) = sin(x0): positive for x0 in (0, π).
    fn stripe_field() -> ParametricField {
        let features = RandomFeatureMap::from_parts(3, vec![1.0, 0.0, 0.0], vec![0.0], Activation::Sine, 0, 1.0).unwrap();
        let head = LinearHead {
            weights: vec![1.0],
            task: Task::Classification,
        };
        ParametricField::new(FieldKind::Occupancy, features, FeatureProjection::Identity { dim: 1 }, head).unwrap()
    }

    #[test]
    fn empty_region_leaves_store_unchanged() {
        let f = stripe_field();
        let mut store = OccupancyStore::new(0.5, [0.0; 3]).unwrap();
        store.mark([9, 9, 9]);
        let before = store.clone();
        let cfg = CompletionConfig {
            threshold: 0.5,
            region: Aabb::new([0.0; 3], [0.0, 1.0, 1.0]),
            pitch: 0.5,
        };
        assert!(complete_blind_spots(&f, &cfg, &mut store).unwrap().is_empty());
        assert_eq!(store, before);
    }

    #[test]
    fn threshold_above_max_marks_nothing() {
        let f = stripe_field();
        let mut store = OccupancyStore::new(0.5, [0.0; 3]).unwrap();
        let cfg = CompletionConfig {
            threshold: 1.0 + 1e-9,
            region: Aabb::new([0.0; 3], [6.0, 1.0, 1.0]),
            pitch: 0.5,
        };
        assert!(complete_blind_spots(&f, &cfg, &mut store).unwrap().is_empty());
        assert!(store.is_empty());
    }

    #[test]
    fn marks_stripe_and_is_idempotent() {
        let f = stripe_field();
        let mut store = OccupancyStore::new(0.5, [0.0; 3]).unwrap();
        let cfg = CompletionConfig {
            threshold: 0.5,
            region: Aabb::new([0.0; 3], [6.0, 1.0, 1.0]),
            pitch: 0.5,
        };
        let added = complete_blind_spots(&f, &cfg, &mut store).unwrap();
        // Centers 0.25 + 0.5 i with sin > 0.5 lie in (π/6, 5π/6): i = 1..=4.
        assert_eq!(added.len(), 4 * 2 * 2);
        assert!(added.iter().all(|c| (1..=4).contains(&c[0])));
        let snapshot = store.clone();
        let again = complete_blind_spots(&f, &cfg, &mut store).unwrap();
        assert!(again.is_empty());
        assert_eq!(store, snapshot);
    }

    #[test]
    fn rejects_non_occupancy_field() {
        let features = RandomFeatureMap::from_parts(3, vec![1.0, 0.0, 0.0], vec![0.0], Activation::Sine, 0, 1.0).unwrap();
        let esdf = ParametricField::new(
            FieldKind::Esdf,
            features,
            FeatureProjection::Identity { dim: 1 },
            LinearHead::zeros(1, Task::Regression),
        )
        .unwrap();
        let mut store = OccupancyStore::new(0.5, [0.0; 3]).unwrap();
        let cfg = CompletionConfig {
            threshold: 0.5,
            region: Aabb::new([0.0; 3], [1.0; 3]),
            pitch: 0.5,
        };
        assert!(complete_blind_spots(&esdf, &cfg, &mut store).is_err());
    }
}
