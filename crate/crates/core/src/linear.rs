//! Linear head over projected features: closed-form ridge fit and AdamW
//! streaming updates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::geometry::dot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn code(self) -> u8 {
        match self {
            Task::Classification => 0,
            Task::Regression => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Task::Classification),
            1 => Some(Task::Regression),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub weights: Vec<f64>,
    pub task: Task,
}

impl LinearHead {
    pub fn zeros(len: usize, task: Task) -> Self {
        Self {
            weights: vec![0.0; len],
            task,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn score(&self, features: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), features.len())?;
        Ok(dot(&self.weights, features))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RidgeConfig {
    pub alpha: f64,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self { alpha: 0.01 }
    }
}

/// Running sums `Σ s sᵀ` and `Σ s t` for the ridge normal equations, so that
/// training sets never have to be materialized as a `k × L` matrix.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    gram: DMatrix<f64>,
    rhs: DVector<f64>,
    count: usize,
    batch: DMatrix<f64>,
    batch_targets: Vec<f64>,
    batch_len: usize,
}

const BATCH: usize = 512;

impl NormalEquations {
    pub fn new(dim: usize) -> Self {
        Self {
            gram: DMatrix::zeros(dim, dim),
            rhs: DVector::zeros(dim),
            count: 0,
            batch: DMatrix::zeros(dim, BATCH),
            batch_targets: vec![0.0; BATCH],
            batch_len: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn count(&self) -> usize {
        self.count + self.batch_len
    }

    pub fn push(&mut self, features: &[f64], target: f64) -> Result<()> {
        check_dim(self.dim(), features.len())?;
        if !target.is_finite() || features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("training sample"));
        }
        self.batch.column_mut(self.batch_len).copy_from_slice(features);
        self.batch_targets[self.batch_len] = target;
        self.batch_len += 1;
        if self.batch_len == BATCH {
            self.flush();
        }
        Ok(())
    }

    fn flush(&mut self) {
        if self.batch_len == 0 {
            return;
        }
        let cols = self.batch.columns(0, self.batch_len);
        self.gram.gemm(1.0, &cols, &cols.transpose(), 1.0);
        let t = DVector::from_column_slice(&self.batch_targets[..self.batch_len]);
        self.rhs.gemv(1.0, &cols, &t, 1.0);
        self.count += self.batch_len;
        self.batch_len = 0;
    }

    /// Solves `(G + αI) η = r` by Cholesky.
    pub fn solve(mut self, cfg: &RidgeConfig, task: Task) -> Result<LinearHead> {
        if !(cfg.alpha >= 0.0) || !cfg.alpha.is_finite() {
            return Err(invalid("alpha", format!("must be >= 0, got {}", cfg.alpha)));
        }
        self.flush();
        if self.count == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let mut a = self.gram;
        for i in 0..a.nrows() {
            a[(i, i)] += cfg.alpha;
        }
        let chol = a.cholesky().ok_or(Error::SingularSystem)?;
        // Cholesky of a PSD matrix can succeed with a vanishing pivot; treat
        // that as singular too.
        let l = chol.l_dirty();
        let max_pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(0.0f64, f64::max);
        let min_pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
        if !(min_pivot > max_pivot * 1e-10) {
            return Err(Error::SingularSystem);
        }
        let weights = chol.solve(&self.rhs);
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok(LinearHead {
            weights: weights.iter().copied().collect(),
            task,
        })
    }
}

/// Minimizes `‖ηᵀS' − T‖² + α‖η‖²` for `S'` of shape `k × L`.
pub fn ridge_solve(features: &DMatrix<f64>, targets: &[f64], cfg: &RidgeConfig, task: Task) -> Result<LinearHead> {
    check_dim(features.ncols(), targets.len())?;
    let mut ne = NormalEquations::new(features.nrows());
    for (col, &t) in features.column_iter().zip(targets) {
        ne.push(col.as_slice(), t)?;
    }
    ne.solve(cfg, task)
}

/// Ridge objective value, used by tests and diagnostics.
pub fn ridge_objective(features: &DMatrix<f64>, targets: &[f64], weights: &[f64], alpha: f64) -> f64 {
    let w = DVector::from_column_slice(weights);
    let pred = features.transpose() * &w;
    let resid: f64 = pred.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    resid + alpha * w.norm_squared()
}

/// Gradient of `½ (t − η·s)²` with respect to `η`.
pub fn streaming_gradient(head: &LinearHead, features: &[f64], target: f64) -> Result<Vec<f64>> {
    let residual = target - head.score(features)?;
    Ok(features.iter().map(|s| -residual * s).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamWConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Decay of the first-moment average.
    pub rate1: f64,
    /// Decay of the second-moment average.
    pub rate2: f64,
    pub epsilon: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            weight_decay: 1e-4,
            rate1: 0.9,
            rate2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamWConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate", "must be positive"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(invalid("weight_decay", "must be >= 0"));
        }
        if !(self.rate1 > 0.0 && self.rate1 < 1.0) || !(self.rate2 > 0.0 && self.rate2 < 1.0) {
            return Err(invalid("rate1/rate2", "moment decay rates must lie in (0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(invalid("epsilon", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamWState {
    pub config: AdamWConfig,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl AdamWState {
    pub fn new(len: usize, config: AdamWConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            first_moment: vec![0.0; len],
            second_moment: vec![0.0; len],
            step: 0,
        })
    }
}

/// One AdamW step with decoupled decay applied to the pre-update weights.
/// A non-finite gradient is rejected before any state is touched.
pub fn adamw_step(head: &mut LinearHead, state: &mut AdamWState, gradient: &[f64]) -> Result<()> {
    check_dim(head.weights.len(), gradient.len())?;
    check_dim(head.weights.len(), state.first_moment.len())?;
    check_dim(head.weights.len(), state.second_moment.len())?;
    if gradient.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let c = state.config;
    state.step += 1;
    let t = state.step as i32;
    let bias1 = 1.0 - c.rate1.powi(t);
    let bias2 = 1.0 - c.rate2.powi(t);
    let decay = 1.0 - c.learning_rate * c.weight_decay;
    for i in 0..gradient.len() {
        let g = gradient[i];
        let m = c.rate1 * state.first_moment[i] + (1.0 - c.rate1) * g;
        let v = c.rate2 * state.second_moment[i] + (1.0 - c.rate2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        let m_hat = m / bias1;
        let v_hat = v / bias2;
        head.weights[i] = head.weights[i] * decay - c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
    }
    Ok(())
}
