//! Unified parametric fields `value(x) = head · R g(W x + b)`.
//!
//! One type serves occupancy (classification score), ESDF (regressed
//! distance) and terrain elevation (2-D input, identity projection by
//! default). Gradients and Hessians are analytic: with `c = Rᵀ head`,
//!
//! ```text
//! ∇f(x)  = Σ_i c_i g'(φ_i) W_i
//! ∇²f(x) = Σ_i c_i g''(φ_i) W_i W_iᵀ,     φ_i = W_i·x + b_i
//! ```
//!
//! `c` is cached and refreshed whenever the head changes.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::features::RandomFeatureMap;
use crate::linear::{adamw_step, streaming_gradient, AdamWState, LinearHead, NormalEquations, RidgeConfig, Task};
use crate::projection::{FeatureProjection, SparseProjection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Occupancy,
    Esdf,
    Terrain,
}

impl FieldKind {
    pub fn input_dim(self) -> usize {
        match self {
            FieldKind::Occupancy | FieldKind::Esdf => 3,
            FieldKind::Terrain => 2,
        }
    }

    pub fn task(self) -> Task {
        match self {
            FieldKind::Occupancy => Task::Classification,
            FieldKind::Esdf | FieldKind::Terrain => Task::Regression,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Occupancy => "occupancy",
            FieldKind::Esdf => "esdf",
            FieldKind::Terrain => "terrain",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            FieldKind::Occupancy => 0,
            FieldKind::Esdf => 1,
            FieldKind::Terrain => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FieldKind::Occupancy),
            1 => Some(FieldKind::Esdf),
            2 => Some(FieldKind::Terrain),
            _ => None,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "occupancy" => Some(FieldKind::Occupancy),
            "esdf" => Some(FieldKind::Esdf),
            "terrain" => Some(FieldKind::Terrain),
            _ => None,
        }
    }
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reusable per-thread buffers for field queries.
#[derive(Debug, Clone, Default)]
pub struct FieldScratch {
    lifted: Vec<f64>,
    projected: Vec<f64>,
}

impl FieldScratch {
    pub fn for_field(field: &ParametricField) -> Self {
        Self {
            lifted: vec![0.0; field.features.feature_dim()],
            projected: vec![0.0; field.projection.output_dim()],
        }
    }

    fn fit(&mut self, field: &ParametricField) {
        self.lifted.resize(field.features.feature_dim(), 0.0);
        self.projected.resize(field.projection.output_dim(), 0.0);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricField {
    kind: FieldKind,
    features: RandomFeatureMap,
    projection: FeatureProjection,
    head: LinearHead,
    feature_weights: Vec<f64>,
}

impl ParametricField {
    pub fn new(
        kind: FieldKind,
        features: RandomFeatureMap,
        projection: FeatureProjection,
        head: LinearHead,
    ) -> Result<Self> {
        check_dim(kind.input_dim(), features.input_dim())?;
        check_dim(features.feature_dim(), projection.input_dim())?;
        check_dim(projection.output_dim(), head.len())?;
        if head.task != kind.task() {
            return Err(invalid("head", format!("task {:?} does not fit a {kind} field", head.task)));
        }
        let feature_weights = projection.transpose_apply(&head.weights)?;
        Ok(Self {
            kind,
            features,
            projection,
            head,
            feature_weights,
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn features(&self) -> &RandomFeatureMap {
        &self.features
    }

    pub fn projection(&self) -> &FeatureProjection {
        &self.projection
    }

    pub fn head(&self) -> &LinearHead {
        &self.head
    }

    pub fn input_dim(&self) -> usize {
        self.features.input_dim()
    }

    /// `Rᵀ head`, the effective weight of each lifted feature.
    pub fn feature_weights(&self) -> &[f64] {
        &self.feature_weights
    }

    pub fn set_head(&mut self, head: LinearHead) -> Result<()> {
        check_dim(self.projection.output_dim(), head.len())?;
        self.feature_weights = self.projection.transpose_apply(&head.weights)?;
        self.head = head;
        Ok(())
    }

    pub fn require_kind(&self, kind: FieldKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: kind.name(),
                actual: self.kind.name(),
            })
        }
    }

    /// Projected feature vector `R g(W x + b)`.
    pub fn projected_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = FieldScratch::for_field(self);
        self.project_features(x, &mut scratch)?;
        Ok(scratch.projected)
    }

    fn project_features(&self, x: &[f64], scratch: &mut FieldScratch) -> Result<()> {
        scratch.fit(self);
        self.features.lift_into(x, &mut scratch.lifted)?;
        self.projection.project_into(&scratch.lifted, &mut scratch.projected)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let mut scratch = FieldScratch::for_field(self);
        self.value_with(x, &mut scratch)
    }

    /// `head · project(R, lift(x))` using caller-owned buffers.
    pub fn value_with(&self, x: &[f64], scratch: &mut FieldScratch) -> Result<f64> {
        self.project_features(x, scratch)?;
        self.head.score(&scratch.projected)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.input_dim()];
        self.gradient_into(x, &mut g)?;
        Ok(g)
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.input_dim();
        check_dim(d, x.len())?;
        check_dim(d, out.len())?;
        out.fill(0.0);
        let act = self.features.activation();
        for (i, &c) in self.feature_weights.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let coef = c * act.derivative(self.features.phase(i, x));
            for (o, w) in out.iter_mut().zip(self.features.weight_row(i)) {
                *o += coef * w;
            }
        }
        Ok(())
    }

    /// Gradient and row-major `d × d` Hessian in one pass.
    pub fn gradient_and_hessian(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.input_dim();
        check_dim(d, x.len())?;
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d * d];
        let act = self.features.activation();
        for (i, &c) in self.feature_weights.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let phase = self.features.phase(i, x);
            let c1 = c * act.derivative(phase);
            let c2 = c * act.second_derivative(phase);
            let w = self.features.weight_row(i);
            for a in 0..d {
                g[a] += c1 * w[a];
                for b in 0..d {
                    h[a * d + b] += c2 * w[a] * w[b];
                }
            }
        }
        Ok((g, h))
    }

    /// One streaming data event: gradient on the projected
    /// features, then an AdamW step on the head. Returns the loss before the
    /// update. The feature map and projection are never touched.
    pub fn online_update(&mut self, x: &[f64], target: f64, state: &mut AdamWState) -> Result<f64> {
        if !target.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("online sample"));
        }
        let s = self.projected_features(x)?;
        let residual = target - self.head.score(&s)?;
        let grad = streaming_gradient(&self.head, &s, target)?;
        let mut head = self.head.clone();
        adamw_step(&mut head, state, &grad)?;
        self.set_head(head)?;
        Ok(0.5 * residual * residual)
    }
}

/// Flat store of training inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    input_dim: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn push(&mut self, x: &[f64], target: f64) -> Result<()> {
        check_dim(self.input_dim, x.len())?;
        self.inputs.extend_from_slice(x);
        self.targets.push(target);
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.inputs
            .chunks_exact(self.input_dim)
            .zip(self.targets.iter().copied())
    }

    /// Deterministic split: every `n`-th sample (offset `n - 1`) goes to the
    /// second set.
    pub fn split_every(&self, n: usize) -> (TrainingSet, TrainingSet) {
        let mut a = TrainingSet::new(self.input_dim);
        let mut b = TrainingSet::new(self.input_dim);
        for (i, (x, t)) in self.iter().enumerate() {
            let dst = if n > 0 && i % n == n - 1 { &mut b } else { &mut a };
            dst.inputs.extend_from_slice(x);
            dst.targets.push(t);
        }
        (a, b)
    }
}

/// Shape and seeds of a field's random basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldConfig {
    /// Lift dimension `M`.
    pub feature_dim: usize,
    /// Projection rows `k`; `None` keeps the lifted features (identity).
    pub projection_dim: Option<usize>,
    pub sparsity: f64,
    /// Weight support `W ~ U[-scale, scale]`.
    pub feature_scale: f64,
    pub feature_seed: u64,
    pub projection_seed: u64,
    pub ridge: RidgeConfig,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            feature_dim: 100,
            projection_dim: Some(50),
            sparsity: 3.0,
            feature_scale: 1.0,
            feature_seed: 1,
            projection_seed: 2,
            ridge: RidgeConfig::default(),
        }
    }
}

impl FieldConfig {
    /// Builds the untrained basis (zero head).
    pub fn build_basis(&self, kind: FieldKind) -> Result<ParametricField> {
        let features = RandomFeatureMap::build(kind.input_dim(), self.feature_dim, self.feature_seed, self.feature_scale)?;
        let projection = match self.projection_dim {
            None => FeatureProjection::Identity { dim: self.feature_dim },
            Some(k) => FeatureProjection::Sparse(SparseProjection::build(
                k,
                self.feature_dim,
                self.sparsity,
                self.projection_seed,
            )?),
        };
        let head = LinearHead::zeros(projection.output_dim(), kind.task());
        ParametricField::new(kind, features, projection, head)
    }
}

/// Lift, project and ridge-solve (offline training).
pub fn fit_field(kind: FieldKind, data: &TrainingSet, cfg: &FieldConfig) -> Result<ParametricField> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    check_dim(kind.input_dim(), data.input_dim())?;
    let mut field = cfg.build_basis(kind)?;
    let mut ne = NormalEquations::new(field.projection.output_dim());
    let mut scratch = FieldScratch::for_field(&field);
    for (x, t) in data.iter() {
        field.project_features(x, &mut scratch)?;
        ne.push(&scratch.projected, t)?;
    }
    let head = ne.solve(&cfg.ridge, kind.task())?;
    field.set_head(head)?;
    Ok(field)
}

/// Occupancy classifier on `{0 free, 1 occupied}` labels.
pub fn train_occupancy(data: &TrainingSet, cfg: &FieldConfig) -> Result<ParametricField> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut seen = [false; 2];
    for &t in data.targets() {
        if t == 0.0 {
            seen[0] = true;
        } else if t == 1.0 {
            seen[1] = true;
        } else {
            return Err(invalid("labels", format!("occupancy labels must be 0 or 1, got {t}")));
        }
    }
    if !(seen[0] && seen[1]) {
        return Err(Error::SingleClass);
    }
    fit_field(FieldKind::Occupancy, data, cfg)
}

/// Unsigned distance regression.
pub fn train_esdf(data: &TrainingSet, cfg: &FieldConfig) -> Result<ParametricField> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(t) = data.targets().iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(invalid("distances", format!("must be finite and >= 0, got {t}")));
    }
    fit_field(FieldKind::Esdf, data, cfg)
}

/// Elevation regression over 2-D ground coordinates.
pub fn train_terrain(data: &TrainingSet, cfg: &FieldConfig) -> Result<ParametricField> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if data.targets().iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("elevation"));
    }
    fit_field(FieldKind::Terrain, data, cfg)
}

/// Regression quality on a labelled set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionMetrics {
    pub r2: f64,
    pub mse: f64,
}

pub fn regression_metrics(field: &ParametricField, data: &TrainingSet) -> Result<RegressionMetrics> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut scratch = FieldScratch::for_field(field);
    let n = data.len() as f64;
    let mean = data.targets().iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, t) in data.iter() {
        let p = field.value_with(x, &mut scratch)?;
        ss_res += (p - t) * (p - t);
        ss_tot += (t - mean) * (t - mean);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(RegressionMetrics { r2, mse: ss_res / n })
}

/// Fraction of samples whose thresholded score (`> threshold`) matches the
/// `{0, 1}` label.
pub fn classification_accuracy(field: &ParametricField, data: &TrainingSet, threshold: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut scratch = FieldScratch::for_field(field);
    let mut correct = 0usize;
    for (x, t) in data.iter() {
        let occupied = field.value_with(x, &mut scratch)? > threshold;
        if occupied == (t > 0.5) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
