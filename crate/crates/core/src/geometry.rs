use serde::{Deserialize, Serialize};

pub type Point3 = [f64; 3];

/// Axis-aligned box. Degenerate (empty) when any `max <= min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.max[i] <= self.min[i])
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .take(3)
            .enumerate()
            .all(|(i, &v)| v >= self.min[i] && v <= self.max[i])
    }

    pub fn extent(&self) -> Point3 {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            let e = self.extent();
            e[0] * e[1] * e[2]
        }
    }

    pub fn center(&self) -> Point3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    /// Cell centers of a regular grid with the given pitch, in x-major
    /// lexicographic order of (x, y, z) indices.
    pub fn grid_centers(&self, pitch: f64) -> Vec<Point3> {
        if self.is_empty() || !(pitch > 0.0) {
            return Vec::new();
        }
        let e = self.extent();
        let n = [
            (e[0] / pitch).floor() as usize,
            (e[1] / pitch).floor() as usize,
            (e[2] / pitch).floor() as usize,
        ];
        let mut out = Vec::with_capacity(n[0] * n[1] * n[2]);
        for i in 0..n[0] {
            for j in 0..n[1] {
                for k in 0..n[2] {
                    out.push([
                        self.min[0] + (i as f64 + 0.5) * pitch,
                        self.min[1] + (j as f64 + 0.5) * pitch,
                        self.min[2] + (k as f64 + 0.5) * pitch,
                    ]);
                }
            }
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Total length of a polyline.
pub fn polyline_length(points: &[Point3]) -> f64 {
    points.windows(2).map(|w| distance(&w[0], &w[1])).sum()
}
