//! Monte-Carlo checks of the subspace-embedding, angle-leakage,
//! Hanson–Wright and residual-energy bounds for a sparse projection.
//!
//! Each trial draws a uniformly random `p`-dimensional subspace `S ⊂ R^M`
//! (orthonormalized Gaussian basis), a unit vector `v ∈ S`, a unit vector
//! `x⊥ ⊥ S` and a component `x_S ∈ S`, then tests every event on
//! `x = x_S + x⊥`. Trials are seeded independently (ChaCha stream = trial
//! index), so the report does not depend on evaluation order.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::norm;
use crate::projection::SparseProjection;

/// Absolute tolerance for the identity `R x − P_RS R x = P_RS^⊥ R x⊥`.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    /// Subspace dimension `p`.
    pub subspace_dim: usize,
    /// Distortion `ε ∈ (0, 0.3]`.
    pub distortion: f64,
    /// Failure budget `δ ∈ (0, 1)`.
    pub failure_budget: f64,
    /// Constant `C` of the dimension rule.
    pub constant: f64,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        Self {
            subspace_dim: 5,
            distortion: 0.3,
            failure_budget: 0.1,
            constant: 1.0,
        }
    }
}

impl EmbeddingSpec {
    pub fn validate(&self) -> Result<()> {
        if self.subspace_dim == 0 {
            return Err(invalid("subspace_dim", "must be at least 1"));
        }
        if !(self.distortion > 0.0 && self.distortion <= 0.3) {
            return Err(invalid("distortion", format!("must lie in (0, 0.3], got {}", self.distortion)));
        }
        if !(self.failure_budget > 0.0 && self.failure_budget < 1.0) {
            return Err(invalid("failure_budget", format!("must lie in (0, 1), got {}", self.failure_budget)));
        }
        if !(self.constant > 0.0) || !self.constant.is_finite() {
            return Err(invalid("constant", "must be positive"));
        }
        Ok(())
    }

    /// Angle-leakage constant `sqrt(2)(1 + ε)`.
    pub fn c1(&self) -> f64 {
        std::f64::consts::SQRT_2 * (1.0 + self.distortion)
    }

    /// Residual constant `1 + C1`.
    pub fn c2(&self) -> f64 {
        1.0 + self.c1()
    }

    /// `ceil(C p ln(p/δ) / ε²)`.
    pub fn choose_dimension(&self) -> Result<usize> {
        self.validate()?;
        let p = self.subspace_dim as f64;
        let k = self.constant * p * (p / self.failure_budget).ln() / (self.distortion * self.distortion);
        // Guard against ceil(218.0000000001) style round-off pushing k up.
        let rounded = k.round();
        let k = if (k - rounded).abs() < 1e-9 { rounded } else { k.ceil() };
        Ok((k as usize).max(1))
    }

    /// The constant `C` for which the dimension rule yields exactly `k`.
    pub fn implied_constant(&self, k: usize) -> f64 {
        let p = self.subspace_dim as f64;
        k as f64 * self.distortion * self.distortion / (p * (p / self.failure_budget).ln())
    }
}

/// Per-trial measurements. Norms are of unit-normalized `v` and `x⊥` unless
/// the caller supplied its own vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub len_ok: bool,
    pub ang_ok: bool,
    pub hw_ok: bool,
    pub residual_ok: bool,
    pub rank_deficient: bool,
    pub perp_norm: f64,
    pub projected_v_norm: f64,
    pub projected_perp_norm: f64,
    pub leakage_norm: f64,
    pub residual_norm: f64,
    /// `|‖e_proj‖² − ‖x⊥‖²| / ‖x⊥‖²` (0 when `x⊥ = 0`).
    pub ratio: f64,
    pub identity_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckScope {
    /// Length preservation and Hanson–Wright only.
    Embedding,
    /// All four events plus the residual identity.
    Residual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualCheckReport {
    pub scope: CheckScope,
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub violations_len: usize,
    pub violations_ang: usize,
    pub violations_hw: usize,
    pub violations_residual: usize,
    pub rank_deficient: usize,
    pub identity_failures: usize,
    pub max_identity_error: f64,
    pub worst_ratio: f64,
    /// `violations_residual / trials`.
    pub empirical_delta: f64,
    pub outcomes: Vec<TrialOutcome>,
}

impl ResidualCheckReport {
    fn from_outcomes(scope: CheckScope, r: &SparseProjection, outcomes: Vec<TrialOutcome>) -> Self {
        let trials = outcomes.len();
        let count = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
        let violations_len = count(|o| !o.len_ok);
        let violations_hw = count(|o| !o.hw_ok);
        let (violations_ang, violations_residual, rank_deficient, identity_failures) = match scope {
            CheckScope::Embedding => (0, 0, 0, 0),
            CheckScope::Residual => (
                count(|o| !o.ang_ok),
                count(|o| !o.residual_ok),
                count(|o| o.rank_deficient),
                count(|o| !(o.identity_error <= IDENTITY_TOLERANCE)),
            ),
        };
        let max_identity_error = outcomes.iter().map(|o| o.identity_error).fold(0.0, f64::max);
        let worst_ratio = outcomes.iter().map(|o| o.ratio).fold(0.0, f64::max);
        Self {
            scope,
            rows: r.rows(),
            cols: r.cols(),
            trials,
            violations_len,
            violations_ang,
            violations_hw,
            violations_residual,
            rank_deficient,
            identity_failures,
            max_identity_error,
            worst_ratio,
            empirical_delta: violations_residual as f64 / trials as f64,
            outcomes,
        }
    }

    pub fn rate_len(&self) -> f64 {
        self.violations_len as f64 / self.trials as f64
    }

    pub fn rate_ang(&self) -> f64 {
        self.violations_ang as f64 / self.trials as f64
    }

    pub fn rate_hw(&self) -> f64 {
        self.violations_hw as f64 / self.trials as f64
    }

    pub fn rate_residual(&self) -> f64 {
        self.empirical_delta
    }

    /// Every event rate within `delta` and the identity held on every trial.
    pub fn passes(&self, delta: f64) -> bool {
        self.rate_len() <= delta
            && self.rate_ang() <= delta
            && self.rate_hw() <= delta
            && self.rate_residual() <= delta
            && self.identity_failures == 0
            && self.rank_deficient == 0
    }

    /// Per-trial CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "trial,len_ok,ang_ok,hw_ok,residual_ok,rank_deficient,proj_v_norm,proj_perp_norm,leakage_norm,residual_norm,ratio,identity_error\n",
        );
        for o in &self.outcomes {
            s.push_str(&format!(
                "{},{},{},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.6e}\n",
                o.trial,
                o.len_ok as u8,
                o.ang_ok as u8,
                o.hw_ok as u8,
                o.residual_ok as u8,
                o.rank_deficient as u8,
                o.projected_v_norm,
                o.projected_perp_norm,
                o.leakage_norm,
                o.residual_norm,
                o.ratio,
                o.identity_error
            ));
        }
        s
    }
}

/// Random vectors for one trial.
pub struct TrialSample {
    /// `M × p` orthonormal basis of `S`.
    pub basis: DMatrix<f64>,
    pub v: Vec<f64>,
    pub x_perp: Vec<f64>,
    pub x_sub: Vec<f64>,
}

pub fn sample_trial(cols: usize, p: usize, seed: u64, trial: usize) -> TrialSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let g = DMatrix::from_fn(cols, p, |_, _| normal());
    let basis = g.qr().q();
    let a = DVector::from_fn(p, |_, _| normal());
    let mut v: Vec<f64> = (&basis * &a).iter().copied().collect();
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    let mut perp = DVector::from_fn(cols, |_, _| normal());
    // Two Gram-Schmidt passes keep x⊥ orthogonal to machine precision.
    for _ in 0..2 {
        let coeffs = basis.transpose() * &perp;
        perp -= &basis * coeffs;
    }
    let pn = perp.norm();
    let x_perp: Vec<f64> = perp.iter().map(|x| x / pn).collect();
    let c = DVector::from_fn(p, |_, _| normal());
    let x_sub: Vec<f64> = (&basis * c).iter().copied().collect();
    TrialSample {
        basis,
        v,
        x_perp,
        x_sub,
    }
}

/// Evaluates all events for explicit vectors. `x_perp` may be zero.
pub fn evaluate_trial(
    r: &SparseProjection,
    spec: &EmbeddingSpec,
    sample: &TrialSample,
    trial: usize,
    scope: CheckScope,
) -> Result<TrialOutcome> {
    let eps = spec.distortion;
    let p = sample.basis.ncols();
    let rv = r.project(&sample.v)?;
    let rperp = r.project(&sample.x_perp)?;
    let v_norm = norm(&sample.v);
    let perp_norm = norm(&sample.x_perp);
    let rv_norm = norm(&rv);
    let rperp_norm = norm(&rperp);

    let len_ok = (rv_norm - v_norm).abs() <= eps * v_norm && (rperp_norm - perp_norm).abs() <= eps * perp_norm;
    let hw_ok = (rperp_norm * rperp_norm - perp_norm * perp_norm).abs() <= eps * perp_norm * perp_norm;

    let mut outcome = TrialOutcome {
        trial,
        len_ok,
        ang_ok: true,
        hw_ok,
        residual_ok: true,
        rank_deficient: false,
        perp_norm,
        projected_v_norm: rv_norm,
        projected_perp_norm: rperp_norm,
        leakage_norm: 0.0,
        residual_norm: 0.0,
        ratio: 0.0,
        identity_error: 0.0,
    };
    if scope == CheckScope::Embedding {
        return Ok(outcome);
    }

    // Orthonormal basis of R·S.
    let k = r.rows();
    let mut image = DMatrix::zeros(k, p);
    for j in 0..p {
        let col: Vec<f64> = sample.basis.column(j).iter().copied().collect();
        image.set_column(j, &DVector::from_vec(r.project(&col)?));
    }
    let rank_deficient = if k < p {
        true
    } else {
        let qr = image.clone().qr();
        let diag = qr.r().diagonal();
        let max = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let min = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
        !(min > 1e-10 * max)
    };
    let q = if k < p { image.clone().qr().q() } else { image.qr().q() };
    let proj = |y: &DVector<f64>| -> DVector<f64> { &q * (q.transpose() * y) };

    let x: Vec<f64> = sample.x_sub.iter().zip(&sample.x_perp).map(|(a, b)| a + b).collect();
    let rx = DVector::from_vec(r.project(&x)?);
    let rperp_v = DVector::from_vec(rperp);
    let e = &rx - proj(&rx);
    let leak = proj(&rperp_v);
    let e_alt = &rperp_v - &leak;
    let identity_error = (&e - &e_alt).amax();
    let e_norm = e.norm();
    let leak_norm = leak.norm();

    let c1 = spec.c1();
    let c2 = spec.c2();
    let n2 = perp_norm * perp_norm;
    // Round-off slack so that `x⊥ = 0` yields a (numerically) zero residual
    // without tripping the multiplicative bounds.
    let slack = 1e-12 * rx.norm().max(1.0);
    let ang_ok = leak_norm <= c1 * eps * perp_norm + slack;
    let residual_ok = !rank_deficient
        && (1.0 - c2 * eps) * perp_norm <= e_norm + slack
        && e_norm <= (1.0 + c2 * eps) * perp_norm + slack
        && (e_norm * e_norm - n2).abs() <= 2.0 * c2 * eps * n2 + slack * slack;

    outcome.ang_ok = ang_ok;
    outcome.residual_ok = residual_ok;
    outcome.rank_deficient = rank_deficient;
    outcome.leakage_norm = leak_norm;
    outcome.residual_norm = e_norm;
    outcome.ratio = if n2 > 0.0 { (e_norm * e_norm - n2).abs() / n2 } else { 0.0 };
    outcome.identity_error = identity_error;
    Ok(outcome)
}

fn run(r: &SparseProjection, spec: &EmbeddingSpec, trials: usize, seed: u64, scope: CheckScope) -> Result<ResidualCheckReport> {
    spec.validate()?;
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if spec.subspace_dim > r.cols() {
        return Err(invalid("subspace_dim", "exceeds the projection's input dimension"));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let sample = sample_trial(r.cols(), spec.subspace_dim, seed, t);
            evaluate_trial(r, spec, &sample, t, scope)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualCheckReport::from_outcomes(scope, r, outcomes))
}

/// Length-preservation and Hanson–Wright events only.
pub fn verify_embedding(r: &SparseProjection, spec: &EmbeddingSpec, trials: usize, seed: u64) -> Result<ResidualCheckReport> {
    run(r, spec, trials, seed, CheckScope::Embedding)
}

/// All four events plus the residual identity.
pub fn verify_residual_energy(
    r: &SparseProjection,
    spec: &EmbeddingSpec,
    trials: usize,
    seed: u64,
) -> Result<ResidualCheckReport> {
    run(r, spec, trials, seed, CheckScope::Residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub cols: usize,
    pub sparsity: f64,
    pub trials: usize,
    pub trial_seed: u64,
    pub projection_seed: u64,
    /// Coarse downward stride; the last gap is then rescanned with stride 1.
    pub stride: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cols: 400,
            sparsity: 3.0,
            trials: 2000,
            trial_seed: 7,
            projection_seed: 11,
            stride: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub k: usize,
    pub passes: bool,
    pub rate_len: f64,
    pub rate_ang: f64,
    pub rate_hw: f64,
    pub rate_residual: f64,
    pub worst_ratio: f64,
    pub max_identity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionSweep {
    pub formula_k: usize,
    pub smallest_passing_k: Option<usize>,
    /// `C` that would make the dimension rule return the smallest passing `k`.
    pub implied_constant: Option<f64>,
    pub points: Vec<SweepPoint>,
    /// Full report at the smallest passing `k`.
    pub best: Option<ResidualCheckReport>,
}

/// Walks `k` downward from the dimension rule until some event rate exceeds
/// `δ`, and returns the smallest `k` that still passed.
pub fn sweep_dimension(spec: &EmbeddingSpec, cfg: &SweepConfig) -> Result<DimensionSweep> {
    let formula_k = spec.choose_dimension()?;
    let start = formula_k.min(cfg.cols);
    let stride = cfg.stride.max(1);
    let mut points = Vec::new();
    let mut eval = |k: usize| -> Result<(bool, ResidualCheckReport)> {
        let r = SparseProjection::build(k, cfg.cols, cfg.sparsity, cfg.projection_seed)?;
        let report = verify_residual_energy(&r, spec, cfg.trials, cfg.trial_seed)?;
        let passes = report.passes(spec.failure_budget);
        points.push(SweepPoint {
            k,
            passes,
            rate_len: report.rate_len(),
            rate_ang: report.rate_ang(),
            rate_hw: report.rate_hw(),
            rate_residual: report.rate_residual(),
            worst_ratio: report.worst_ratio,
            max_identity_error: report.max_identity_error,
        });
        Ok((passes, report))
    };

    let (ok, report) = eval(start)?;
    if !ok {
        return Ok(DimensionSweep {
            formula_k,
            smallest_passing_k: None,
            implied_constant: None,
            points,
            best: None,
        });
    }
    let mut best_k = start;
    let mut best = report;
    // Coarse pass.
    let mut k = start;
    let mut failed_at = 0usize;
    while k > stride {
        k -= stride;
        let (ok, report) = eval(k)?;
        if ok {
            best_k = k;
            best = report;
        } else {
            failed_at = k;
            break;
        }
    }
    // Fine pass inside the last gap.
    if stride > 1 {
        let mut k = best_k;
        while k > 1 && k - 1 > failed_at {
            k -= 1;
            let (ok, report) = eval(k)?;
            if ok {
                best_k = k;
                best = report;
            } else {
                break;
            }
        }
    }
    points.sort_by_key(|p| std::cmp::Reverse(p.k));
    Ok(DimensionSweep {
        formula_k,
        smallest_passing_k: Some(best_k),
        implied_constant: Some(spec.implied_constant(best_k)),
        points,
        best: Some(best),
    })
}
