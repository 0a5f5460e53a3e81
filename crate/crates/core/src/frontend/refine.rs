//! Gradient refinement of a waypoint path against a field.
//!
//! `J(P) = λ_g Σ ‖∇y(x_i)‖² + λ_d Σ ‖x_i − x_i,init‖²` over interior points.
//! During refinement both sums are normalized: the gradient sum by its value
//! at `P_init`, the deviation sum by `n_interior · ℓ²` with `ℓ` the mean
//! segment length of `P_init` (the deviation sum is zero at `P_init`, so it
//! cannot serve as its own scale). Each step moves the steepest waypoint by
//! `α · ℓ`; both choices make the result covariant under uniform scaling of
//! the scene.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::ParametricField;
use crate::geometry::Point3;

use super::WaypointPath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefinementConfig {
    pub gradient_weight: f64,
    pub deviation_weight: f64,
    pub iterations: usize,
    /// Step as a fraction of the mean segment length of `P_init`.
    pub step: f64,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            gradient_weight: 1.0,
            deviation_weight: 1.0,
            iterations: 50,
            step: 0.05,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_weight >= 0.0) || !(self.deviation_weight >= 0.0) {
            return Err(invalid("weights", "must be non-negative"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(invalid("step", "must be positive"));
        }
        Ok(())
    }
}

/// Weights after normalization; plugging these into [`refinement_cost`]
/// reproduces the objective that refinement actually minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedWeights {
    pub gradient_weight: f64,
    pub deviation_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementOutcome {
    pub path: WaypointPath,
    /// Normalized cost of every accepted iterate, starting with `P_init`.
    pub cost_trace: Vec<f64>,
    pub weights: NormalizedWeights,
    /// Set when a non-finite cost stopped refinement early.
    pub aborted: bool,
}

fn check_pair(p: &WaypointPath, init: &WaypointPath, field: &ParametricField) -> Result<()> {
    if p.len() != init.len() {
        return Err(Error::DimensionMismatch {
            expected: init.len(),
            actual: p.len(),
        });
    }
    if field.input_dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: field.input_dim(),
        });
    }
    Ok(())
}

/// `(Σ ‖∇y(x_i)‖², Σ ‖x_i − x_i,init‖²)` over interior points.
pub fn refinement_terms(p: &WaypointPath, init: &WaypointPath, field: &ParametricField) -> Result<(f64, f64)> {
    check_pair(p, init, field)?;
    let n = p.len();
    let mut grad_sum = 0.0;
    let mut dev_sum = 0.0;
    let mut g = [0.0; 3];
    for i in 1..n - 1 {
        let x = p.points()[i];
        field.gradient_into(&x, &mut g)?;
        grad_sum += g.iter().map(|v| v * v).sum::<f64>();
        dev_sum += (0..3).map(|a| (x[a] - init.points()[i][a]).powi(2)).sum::<f64>();
    }
    Ok((grad_sum, dev_sum))
}

pub fn refinement_cost(p: &WaypointPath, init: &WaypointPath, field: &ParametricField, cfg: &RefinementConfig) -> Result<f64> {
    let (g, d) = refinement_terms(p, init, field)?;
    Ok(cfg.gradient_weight * g + cfg.deviation_weight * d)
}

/// `∂J/∂x_i` for every waypoint (zero at the fixed endpoints):
/// `2 λ_g H(x_i) ∇y(x_i) + 2 λ_d (x_i − x_i,init)`.
pub fn refinement_gradient(
    p: &WaypointPath,
    init: &WaypointPath,
    field: &ParametricField,
    gradient_weight: f64,
    deviation_weight: f64,
) -> Result<Vec<Point3>> {
    check_pair(p, init, field)?;
    let n = p.len();
    let mut out = vec![[0.0; 3]; n];
    for i in 1..n - 1 {
        let x = p.points()[i];
        let x0 = init.points()[i];
        let (g, h) = field.gradient_and_hessian(&x)?;
        for a in 0..3 {
            let hg: f64 = (0..3).map(|b| h[a * 3 + b] * g[b]).sum();
            out[i][a] = 2.0 * gradient_weight * hg + 2.0 * deviation_weight * (x[a] - x0[a]);
        }
    }
    Ok(out)
}

pub fn normalized_weights(init: &WaypointPath, field: &ParametricField, cfg: &RefinementConfig) -> Result<NormalizedWeights> {
    let (g0, _) = refinement_terms(init, init, field)?;
    let interior = init.len().saturating_sub(2).max(1) as f64;
    let ell = init.mean_segment();
    Ok(NormalizedWeights {
        gradient_weight: cfg.gradient_weight / (g0 + 1e-12),
        deviation_weight: cfg.deviation_weight / (interior * ell * ell + 1e-12),
    })
}

fn weighted(w: &NormalizedWeights) -> RefinementConfig {
    RefinementConfig {
        gradient_weight: w.gradient_weight,
        deviation_weight: w.deviation_weight,
        ..Default::default()
    }
}

/// Gradient descent on interior waypoints with persistent step halving
/// whenever a step would increase the cost. Returns the best iterate.
pub fn refine_path(init: &WaypointPath, field: &ParametricField, cfg: &RefinementConfig) -> Result<RefinementOutcome> {
    cfg.validate()?;
    let weights = normalized_weights(init, field, cfg)?;
    let wcfg = weighted(&weights);
    let ell = init.mean_segment();
    let mut current = init.clone();
    let mut cost = refinement_cost(&current, init, field, &wcfg)?;
    let mut trace = vec![cost];
    let mut aborted = !cost.is_finite();
    let mut step = cfg.step;
    let n = init.len();

    'outer: for _ in 0..cfg.iterations {
        if aborted || n <= 2 {
            break;
        }
        let grad = refinement_gradient(&current, init, field, weights.gradient_weight, weights.deviation_weight)?;
        let gmax = grad
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
            .fold(0.0, f64::max);
        if !gmax.is_finite() {
            aborted = true;
            break;
        }
        if gmax == 0.0 {
            break;
        }
        for _ in 0..60 {
            let scale = step * ell / gmax;
            let mut pts = current.points().to_vec();
            for i in 1..n - 1 {
                for a in 0..3 {
                    pts[i][a] -= scale * grad[i][a];
                }
            }
            let trial = match WaypointPath::new(pts) {
                Ok(t) => t,
                Err(_) => {
                    aborted = true;
                    break 'outer;
                }
            };
            let c = refinement_cost(&trial, init, field, &wcfg)?;
            if !c.is_finite() {
                log::warn!("non-finite refinement cost; keeping last finite iterate");
                aborted = true;
                break 'outer;
            }
            if c <= cost {
                current = trial;
                cost = c;
                trace.push(c);
                continue 'outer;
            }
            step *= 0.5;
        }
        break;
    }
    Ok(RefinementOutcome {
        path: current,
        cost_trace: trace,
        weights,
        aborted,
    })
}
