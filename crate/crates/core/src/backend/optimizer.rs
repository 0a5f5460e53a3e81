//! Limited-memory BFGS with Armijo backtracking, and trajectory optimization
//! on top of it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::bspline::BSplineTrajectory;
use super::costs::{CostRanges, TrajectoryObjective};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when the relative cost decrease of an iteration falls below this.
    pub relative_tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            memory: 8,
            gradient_tolerance: 1e-8,
            relative_tolerance: 1e-12,
            armijo: 1e-4,
            max_backtracks: 50,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(invalid("memory", "must be at least 1"));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(invalid("armijo", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    GradientTolerance,
    RelativeTolerance,
    IterationBudget,
    LineSearchFailed,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOutcome {
    pub x: Vec<f64>,
    pub cost: f64,
    /// Cost after each accepted iterate, starting with the initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

/// Minimizes `f`, which returns the cost and writes the gradient into its
/// second argument. The returned trace is non-increasing.
pub fn minimize<F>(x0: &[f64], cfg: &OptimizerConfig, mut f: F) -> Result<MinimizeOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    cfg.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut cost = f(&x, &mut g)?;
    let mut evaluations = 1;
    let mut trace = vec![cost];
    if !cost.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Ok(MinimizeOutcome {
            x,
            cost,
            trace,
            iterations: 0,
            evaluations,
            stop: StopReason::NonFinite,
        });
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut stop = StopReason::IterationBudget;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < cfg.gradient_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        // First step without curvature info: unit length in x.
        let mut step = if history.is_empty() {
            1.0 / norm(&d).max(1e-300)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            let c = f(&x_new, &mut g_new)?;
            evaluations += 1;
            if !c.is_finite() || g_new.iter().any(|v| !v.is_finite()) {
                log::warn!("non-finite cost during line search; keeping last finite iterate");
                stop = StopReason::NonFinite;
                break;
            }
            if c <= cost + cfg.armijo * step * slope {
                accepted = Some(c);
                break;
            }
            step *= 0.5;
        }
        let Some(c) = accepted else {
            if stop != StopReason::NonFinite {
                stop = StopReason::LineSearchFailed;
            }
            break;
        };
        iterations += 1;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = cost - c;
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        cost = c;
        trace.push(cost);
        if decrease <= cfg.relative_tolerance * cost.abs().max(1e-300) {
            stop = StopReason::RelativeTolerance;
            break;
        }
    }
    Ok(MinimizeOutcome {
        x,
        cost,
        trace,
        iterations,
        evaluations,
        stop,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutcome {
    pub trajectory: BSplineTrajectory,
    pub cost_trace: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
}

/// Minimizes the objective over the free control points; the first and last
/// `degree` control points stay fixed.
pub fn optimize_trajectory(
    initial: &BSplineTrajectory,
    objective: &TrajectoryObjective<'_>,
    cfg: &OptimizerConfig,
) -> Result<TrajectoryOutcome> {
    let dim = initial.dim();
    let free = CostRanges::for_trajectory(initial).free;
    if free.is_empty() {
        return Err(invalid("trajectory", "no free control points"));
    }
    let lo = *free.start() * dim;
    let hi = (*free.end() + 1) * dim;
    let mut work = initial.clone();
    let mut full_grad = vec![0.0; initial.control().len()];
    let x0 = initial.control()[lo..hi].to_vec();
    let out = minimize(&x0, cfg, |x, g| {
        work.control_mut()[lo..hi].copy_from_slice(x);
        let c = objective.evaluate(&work, &mut full_grad)?;
        g.copy_from_slice(&full_grad[lo..hi]);
        Ok(c)
    })?;
    let mut trajectory = initial.clone();
    trajectory.control_mut()[lo..hi].copy_from_slice(&out.x);
    Ok(TrajectoryOutcome {
        trajectory,
        cost_trace: out.trace,
        iterations: out.iterations,
        stop: out.stop,
    })
}
