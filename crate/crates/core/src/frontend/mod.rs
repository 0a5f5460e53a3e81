//! Front-end: lattice search over an occupancy field and gradient refinement
//! of the resulting waypoints.

mod refine;
mod search;

pub use refine::{
    normalized_weights, refine_path, refinement_cost, refinement_gradient, refinement_terms, NormalizedWeights, RefinementConfig,
    RefinementOutcome,
};
pub use search::{neighbor_offsets, search_initial_path, LatticeCell, SearchConfig, SearchOutcome};

use crate::error::{invalid, Error, Result};
use crate::geometry::{polyline_length, Point3};

/// Ordered waypoints with fixed endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPath {
    points: Vec<Point3>,
}

impl WaypointPath {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("points", "a path needs at least two waypoints"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("waypoint"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> Point3 {
        self.points[0]
    }

    pub fn goal(&self) -> Point3 {
        self.points[self.points.len() - 1]
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.points)
    }

    /// Mean distance between consecutive waypoints.
    pub fn mean_segment(&self) -> f64 {
        self.length() / (self.points.len() - 1) as f64
    }

    /// Points spaced at most `spacing` apart along the polyline, including
    /// every original vertex.
    pub fn densify(&self, spacing: f64) -> Vec<Point3> {
        let mut out = vec![self.points[0]];
        for w in self.points.windows(2) {
            let d = crate::geometry::distance(&w[0], &w[1]);
            let n = ((d / spacing).ceil() as usize).max(1);
            for j in 1..=n {
                let t = j as f64 / n as f64;
                out.push(std::array::from_fn(|a| w[0][a] + t * (w[1][a] - w[0][a])));
            }
        }
        out
    }

    /// Re-samples the polyline to `count ≥ 2` points equally spaced by arc length.
    pub fn resample(&self, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(invalid("count", "need at least two samples"));
        }
        let total = self.length();
        let mut cum = vec![0.0];
        for w in self.points.windows(2) {
            cum.push(cum[cum.len() - 1] + crate::geometry::distance(&w[0], &w[1]));
        }
        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        for j in 0..count {
            let s = total * j as f64 / (count - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (self.points[seg], self.points[seg + 1]);
            out.push(std::array::from_fn(|k| a[k] + t * (b[k] - a[k])));
        }
        out[0] = self.start();
        out[count - 1] = self.goal();
        Self::new(out)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,z\n");
        for p in &self.points {
            s.push_str(&format!("{:.9},{:.9},{:.9}\n", p[0], p[1], p[2]));
        }
        s
    }
}
