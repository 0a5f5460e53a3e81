//! Uniform B-splines: control points `Q_0..Q_N`, degree `p`, knot interval
//! `Δt`, knots `t_j = (j − p) Δt`. The curve is defined on `[0, (N + 1 − p) Δt]`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frontend::WaypointPath;

#[derive(Debug, Clone, PartialEq)]
pub struct BSplineTrajectory {
    dim: usize,
    degree: usize,
    dt: f64,
    /// Flat, point-major: `Q_i = control[i*dim .. (i+1)*dim]`.
    control: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub acceleration: [f64; 3],
}

impl BSplineTrajectory {
    pub fn new(dim: usize, degree: usize, dt: f64, control: Vec<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(invalid("dim", "control points must be 2D or 3D"));
        }
        if degree < 2 {
            return Err(invalid("degree", "must be at least 2"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        if !control.len().is_multiple_of(dim) {
            return Err(invalid("control", "length is not a multiple of the dimension"));
        }
        if control.len() / dim < degree + 1 {
            return Err(invalid("control", format!("need at least {} control points", degree + 1)));
        }
        if control.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("control point"));
        }
        Ok(Self {
            dim,
            degree,
            dt,
            control,
        })
    }

    /// Control polygon from waypoints resampled uniformly by arc length to
    /// `count` points; `dim = 2` keeps only (x, y).
    pub fn from_waypoints(path: &WaypointPath, count: usize, dim: usize, degree: usize, dt: f64) -> Result<Self> {
        let resampled = path.resample(count)?;
        let control = resampled.points().iter().flat_map(|p| p[..dim].to_vec()).collect();
        Self::new(dim, degree, dt, control)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of control points, `N + 1`.
    pub fn len(&self) -> usize {
        self.control.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.control.is_empty()
    }

    pub fn control(&self) -> &[f64] {
        &self.control
    }

    pub fn control_mut(&mut self) -> &mut [f64] {
        &mut self.control
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.control[i * self.dim..(i + 1) * self.dim]
    }

    pub fn duration(&self) -> f64 {
        (self.len() - self.degree) as f64 * self.dt
    }

    /// Velocity control points `(Q_{i+1} − Q_i) / Δt`, flat.
    pub fn velocity_points(&self) -> Vec<f64> {
        difference(&self.control, self.dim, self.dt)
    }

    /// Acceleration control points `(V_{i+1} − V_i) / Δt`, flat.
    pub fn acceleration_points(&self) -> Vec<f64> {
        difference(&self.velocity_points(), self.dim, self.dt)
    }

    /// Position and its first two derivatives at time `t` (clamped to the
    /// curve domain). Unused trailing components are zero for 2D curves.
    pub fn evaluate(&self, t: f64) -> TrajectorySample {
        let t = t.clamp(0.0, self.duration());
        let mut out = TrajectorySample {
            t,
            position: [0.0; 3],
            velocity: [0.0; 3],
            acceleration: [0.0; 3],
        };
        let v = self.velocity_points();
        let a = difference(&v, self.dim, self.dt);
        let p = self.degree;
        let pos = de_boor(&self.control, self.dim, p, self.dt, t);
        let vel = de_boor(&v, self.dim, p - 1, self.dt, t);
        let acc = de_boor(&a, self.dim, p - 2, self.dt, t);
        out.position[..self.dim].copy_from_slice(&pos);
        out.velocity[..self.dim].copy_from_slice(&vel);
        out.acceleration[..self.dim].copy_from_slice(&acc);
        out
    }

    /// `count ≥ 2` samples at uniform times across the whole domain.
    pub fn sample(&self, count: usize) -> Vec<TrajectorySample> {
        let count = count.max(2);
        let d = self.duration();
        (0..count)
            .map(|j| self.evaluate(d * j as f64 / (count - 1) as f64))
            .collect()
    }

    pub fn control_csv(&self) -> String {
        let mut s = String::from(if self.dim == 2 { "i,x,y\n" } else { "i,x,y,z\n" });
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().map(|v| format!("{v:.9}")).collect();
            s.push_str(&format!("{i},{}\n", row.join(",")));
        }
        s
    }
}

fn difference(points: &[f64], dim: usize, dt: f64) -> Vec<f64> {
    let n = points.len() / dim;
    let mut out = Vec::with_capacity((n.saturating_sub(1)) * dim);
    for i in 0..n.saturating_sub(1) {
        for a in 0..dim {
            out.push((points[(i + 1) * dim + a] - points[i * dim + a]) / dt);
        }
    }
    out
}

/// de Boor evaluation on uniform knots `t_m = (m − q) Δt` for degree `q`.
fn de_boor(control: &[f64], dim: usize, q: usize, dt: f64, t: f64) -> Vec<f64> {
    let n = control.len() / dim;
    let knot = |m: usize| (m as f64 - q as f64) * dt;
    // Span j with t_j ≤ t < t_{j+1}, clamped so the last point is included.
    let k = ((t / dt).floor() as usize).min(n - 1 - q);
    let j = k + q;
    let mut d: Vec<Vec<f64>> = (0..=q).map(|i| control[(j + i - q) * dim..(j + i - q + 1) * dim].to_vec()).collect();
    for r in 1..=q {
        for i in (r..=q).rev() {
            let lo = knot(i + j - q);
            let hi = knot(i + 1 + j - r);
            let alpha = (t - lo) / (hi - lo);
            for a in 0..dim {
                d[i][a] = (1.0 - alpha) * d[i - 1][a] + alpha * d[i][a];
            }
        }
    }
    d.swap_remove(q)
}
