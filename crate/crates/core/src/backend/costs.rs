//! Trajectory cost terms. Each term reports its unweighted cost and adds its
//! gradient with respect to the flat control-point vector. Terms are looked
//! up by name in a [`CostRegistry`] and combined in a [`TrajectoryObjective`].

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{FieldKind, FieldScratch, ParametricField};

use super::bspline::BSplineTrajectory;

/// `F(x, y) = (x − y)²` if `x ≤ y`, else 0.
pub fn penalty_f(x: f64, y: f64) -> f64 {
    if x <= y {
        (x - y) * (x - y)
    } else {
        0.0
    }
}

/// `(∂F/∂x, ∂F/∂y)`.
pub fn penalty_f_grad(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (2.0 * (x - y), -2.0 * (x - y))
    } else {
        (0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryCostConfig {
    pub smoothness_weight: f64,
    pub collision_weight: f64,
    pub dynamic_weight: f64,
    pub terrain_weight: f64,
    /// Clearance `S_f` in meters.
    pub clearance: f64,
    pub max_velocity: f64,
    pub max_acceleration: f64,
}

impl Default for TrajectoryCostConfig {
    fn default() -> Self {
        Self {
            smoothness_weight: 1.0,
            collision_weight: 10.0,
            dynamic_weight: 1.0,
            terrain_weight: 5.0,
            clearance: 0.5,
            max_velocity: 5.0,
            max_acceleration: 4.0,
        }
    }
}

impl TrajectoryCostConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            self.smoothness_weight,
            self.collision_weight,
            self.dynamic_weight,
            self.terrain_weight,
        ];
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(invalid("weights", "must be finite and non-negative"));
        }
        for (name, v) in [
            ("clearance", self.clearance),
            ("max_velocity", self.max_velocity),
            ("max_acceleration", self.max_acceleration),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(name, "must be positive"));
            }
        }
        Ok(())
    }

    /// Alias of the clearance.
    pub fn d_min(&self) -> f64 {
        self.clearance
    }
}

/// Index ranges of every cost term for degree `p` and last index `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostRanges {
    /// Second differences centered at `i`.
    pub smoothness: RangeInclusive<usize>,
    /// Control points `Q_i`.
    pub collision: RangeInclusive<usize>,
    /// Velocity control points `V_i`.
    pub velocity: RangeInclusive<usize>,
    /// Acceleration control points `A_i`.
    pub acceleration: RangeInclusive<usize>,
    /// Control points `Q_i`.
    pub terrain: RangeInclusive<usize>,
    /// Control points moved by the optimizer.
    pub free: RangeInclusive<usize>,
}

impl CostRanges {
    pub fn new(degree: usize, last: usize) -> Self {
        let p = degree as isize;
        let n = last as isize;
        let clamp = |lo: isize, hi: isize, max: isize| -> RangeInclusive<usize> {
            let lo = lo.max(0);
            let hi = hi.min(max);
            if hi < lo {
                #[allow(clippy::reversed_empty_ranges)]
                return 1..=0;
            }
            lo as usize..=hi as usize
        };
        Self {
            smoothness: clamp(p - 1, n - p + 1, n - 1).intersect_from(1),
            collision: clamp(p, n - p, n),
            velocity: clamp(p - 1, n - p, n - 1),
            acceleration: clamp(p - 2, n - p, n - 2),
            terrain: clamp(p, n - p, n),
            free: clamp(p, n - p, n),
        }
    }

    pub fn for_trajectory(traj: &BSplineTrajectory) -> Self {
        Self::new(traj.degree(), traj.len() - 1)
    }
}

trait IntersectFrom {
    fn intersect_from(self, lo: usize) -> Self;
}

impl IntersectFrom for RangeInclusive<usize> {
    fn intersect_from(self, lo: usize) -> Self {
        let (a, b) = self.into_inner();
        a.max(lo)..=b
    }
}

/// Fields a cost term may need.
#[derive(Clone, Copy, Default)]
pub struct CostFields<'a> {
    pub esdf: Option<&'a ParametricField>,
    pub terrain: Option<&'a ParametricField>,
}

pub trait CostTerm: Send + Sync {
    fn name(&self) -> &'static str;
    /// Unweighted cost; adds `∂cost/∂Q` into `grad` (same layout as the
    /// control vector).
    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64>;
}

/// `Σ ‖Q_{i+1} − 2Q_i + Q_{i−1}‖²` over `range`.
pub fn second_difference_cost(control: &[f64], dim: usize, range: RangeInclusive<usize>, grad: &mut [f64]) -> f64 {
    let mut cost = 0.0;
    for i in range {
        for a in 0..dim {
            let d = control[(i + 1) * dim + a] - 2.0 * control[i * dim + a] + control[(i - 1) * dim + a];
            cost += d * d;
            grad[(i + 1) * dim + a] += 2.0 * d;
            grad[i * dim + a] -= 4.0 * d;
            grad[(i - 1) * dim + a] += 2.0 * d;
        }
    }
    cost
}

pub struct Smoothness;

impl CostTerm for Smoothness {
    fn name(&self) -> &'static str {
        "smoothness"
    }

    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        let r = CostRanges::for_trajectory(traj);
        Ok(second_difference_cost(traj.control(), traj.dim(), r.smoothness, grad))
    }
}

pub struct Collision<'a> {
    pub esdf: &'a ParametricField,
    pub clearance: f64,
}

impl CostTerm for Collision<'_> {
    fn name(&self) -> &'static str {
        "collision"
    }

    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        if traj.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                actual: traj.dim(),
            });
        }
        let mut scratch = FieldScratch::for_field(self.esdf);
        let mut g = [0.0; 3];
        let mut cost = 0.0;
        for i in CostRanges::for_trajectory(traj).collision {
            let q = traj.point(i);
            let d = self.esdf.value_with(q, &mut scratch)?;
            if d <= self.clearance {
                let diff = d - self.clearance;
                cost += diff * diff;
                self.esdf.gradient_into(q, &mut g)?;
                for a in 0..3 {
                    grad[i * 3 + a] += 2.0 * diff * g[a];
                }
            }
        }
        Ok(cost)
    }
}

pub struct Velocity {
    pub limit: f64,
}

impl CostTerm for Velocity {
    fn name(&self) -> &'static str {
        "velocity"
    }

    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        let dim = traj.dim();
        let dt = traj.dt();
        let q = traj.control();
        let lim2 = self.limit * self.limit;
        let mut cost = 0.0;
        for i in CostRanges::for_trajectory(traj).velocity {
            for a in 0..dim {
                let v = (q[(i + 1) * dim + a] - q[i * dim + a]) / dt;
                let y = v * v;
                cost += penalty_f(lim2, y);
                let dv = penalty_f_grad(lim2, y).1 * 2.0 * v / dt;
                grad[(i + 1) * dim + a] += dv;
                grad[i * dim + a] -= dv;
            }
        }
        Ok(cost)
    }
}

pub struct Acceleration {
    pub limit: f64,
}

impl CostTerm for Acceleration {
    fn name(&self) -> &'static str {
        "acceleration"
    }

    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        let dim = traj.dim();
        let dt2 = traj.dt() * traj.dt();
        let q = traj.control();
        let lim2 = self.limit * self.limit;
        let mut cost = 0.0;
        for i in CostRanges::for_trajectory(traj).acceleration {
            for a in 0..dim {
                let acc = (q[(i + 2) * dim + a] - 2.0 * q[(i + 1) * dim + a] + q[i * dim + a]) / dt2;
                let y = acc * acc;
                cost += penalty_f(lim2, y);
                let da = penalty_f_grad(lim2, y).1 * 2.0 * acc / dt2;
                grad[(i + 2) * dim + a] += da;
                grad[(i + 1) * dim + a] -= 2.0 * da;
                grad[i * dim + a] += da;
            }
        }
        Ok(cost)
    }
}

/// `‖∇E(q)‖²` of a sine-feature terrain model and its gradient in closed
/// form, `−2 W diag(c ⊙ sin y) Wᵀ W (c ⊙ cos y)` with `y = Wq + b` and `c`
/// the effective feature weights.
pub fn terrain_penalty(field: &ParametricField, q: &[f64]) -> Result<(f64, [f64; 2])> {
    field.require_kind(FieldKind::Terrain)?;
    if q.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: q.len(),
        });
    }
    let features = field.features();
    let c = field.feature_weights();
    let mut slope = [0.0; 2];
    let mut sin_terms = Vec::with_capacity(c.len());
    for (i, &ci) in c.iter().enumerate() {
        let w = features.weight_row(i);
        let y = w[0] * q[0] + w[1] * q[1] + features.biases()[i];
        let (s, co) = y.sin_cos();
        slope[0] += ci * co * w[0];
        slope[1] += ci * co * w[1];
        sin_terms.push(ci * s);
    }
    let mut grad = [0.0; 2];
    for (i, &cs) in sin_terms.iter().enumerate() {
        let w = features.weight_row(i);
        let wg = w[0] * slope[0] + w[1] * slope[1];
        grad[0] -= 2.0 * cs * w[0] * wg;
        grad[1] -= 2.0 * cs * w[1] * wg;
    }
    Ok((slope[0] * slope[0] + slope[1] * slope[1], grad))
}

pub struct TerrainSlope<'a> {
    pub terrain: &'a ParametricField,
}

impl CostTerm for TerrainSlope<'_> {
    fn name(&self) -> &'static str {
        "terrain"
    }

    fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        if traj.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: traj.dim(),
            });
        }
        let mut cost = 0.0;
        for i in CostRanges::for_trajectory(traj).terrain {
            let (c, g) = terrain_penalty(self.terrain, traj.point(i))?;
            cost += c;
            grad[i * 2] += g[0];
            grad[i * 2 + 1] += g[1];
        }
        Ok(cost)
    }
}

pub type CostFactory = for<'a> fn(&TrajectoryCostConfig, &CostFields<'a>) -> Result<Box<dyn CostTerm + 'a>>;

/// Name → constructor table for cost terms.
pub struct CostRegistry {
    entries: BTreeMap<&'static str, CostFactory>,
}

impl Default for CostRegistry {
    fn default() -> Self {
        let mut r = Self {
            entries: BTreeMap::new(),
        };
        r.register("smoothness", |_, _| Ok(Box::new(Smoothness)));
        r.register("collision", |cfg, fields| {
            let esdf = fields.esdf.ok_or_else(|| invalid("collision", "requires an ESDF field"))?;
            esdf.require_kind(FieldKind::Esdf)?;
            Ok(Box::new(Collision {
                esdf,
                clearance: cfg.clearance,
            }))
        });
        r.register("velocity", |cfg, _| {
            Ok(Box::new(Velocity {
                limit: cfg.max_velocity,
            }))
        });
        r.register("acceleration", |cfg, _| {
            Ok(Box::new(Acceleration {
                limit: cfg.max_acceleration,
            }))
        });
        r.register("terrain", |_, fields| {
            let terrain = fields.terrain.ok_or_else(|| invalid("terrain", "requires a terrain field"))?;
            terrain.require_kind(FieldKind::Terrain)?;
            Ok(Box::new(TerrainSlope { terrain }))
        });
        r
    }
}

impl CostRegistry {
    pub fn register(&mut self, name: &'static str, factory: CostFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn create<'a>(
        &self,
        name: &str,
        cfg: &TrajectoryCostConfig,
        fields: &CostFields<'a>,
    ) -> Result<Box<dyn CostTerm + 'a>> {
        let f = self
            .entries
            .get(name)
            .ok_or_else(|| invalid("cost", format!("unknown cost term '{name}'")))?;
        f(cfg, fields)
    }
}

/// Weighted sum of cost terms.
pub struct TrajectoryObjective<'a> {
    terms: Vec<(f64, Box<dyn CostTerm + 'a>)>,
}

impl<'a> TrajectoryObjective<'a> {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn push(&mut self, weight: f64, term: Box<dyn CostTerm + 'a>) {
        self.terms.push((weight, term));
    }

    /// `λ_s f_s + λ_c f_c + λ_d (f_v + f_a) + λ_t f_t`; the collision term is
    /// included when an ESDF is given, the terrain term when a terrain field
    /// is given and `λ_t > 0`.
    pub fn from_config(cfg: &TrajectoryCostConfig, fields: &CostFields<'a>) -> Result<Self> {
        cfg.validate()?;
        let reg = CostRegistry::default();
        let mut obj = Self::new();
        obj.push(cfg.smoothness_weight, reg.create("smoothness", cfg, fields)?);
        if fields.esdf.is_some() {
            obj.push(cfg.collision_weight, reg.create("collision", cfg, fields)?);
        }
        obj.push(cfg.dynamic_weight, reg.create("velocity", cfg, fields)?);
        obj.push(cfg.dynamic_weight, reg.create("acceleration", cfg, fields)?);
        if fields.terrain.is_some() && cfg.terrain_weight > 0.0 {
            obj.push(cfg.terrain_weight, reg.create("terrain", cfg, fields)?);
        }
        Ok(obj)
    }

    pub fn term_names(&self) -> Vec<&'static str> {
        self.terms.iter().map(|(_, t)| t.name()).collect()
    }

    /// Total cost; `grad` is overwritten with the total gradient.
    pub fn evaluate(&self, traj: &BSplineTrajectory, grad: &mut [f64]) -> Result<f64> {
        grad.fill(0.0);
        let mut scratch = vec![0.0; grad.len()];
        let mut total = 0.0;
        for (w, term) in &self.terms {
            scratch.fill(0.0);
            total += w * term.evaluate(traj, &mut scratch)?;
            for (g, s) in grad.iter_mut().zip(&scratch) {
                *g += w * s;
            }
        }
        Ok(total)
    }

    /// Unweighted value of each term.
    pub fn breakdown(&self, traj: &BSplineTrajectory) -> Result<Vec<(&'static str, f64)>> {
        let mut scratch = vec![0.0; traj.control().len()];
        self.terms
            .iter()
            .map(|(_, t)| Ok((t.name(), t.evaluate(traj, &mut scratch)?)))
            .collect()
    }
}

impl Default for TrajectoryObjective<'_> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Activation, RandomFeatureMap};
    use crate::linear::{LinearHead, Task};
    use crate::projection::FeatureProjection;

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_f(1.0, 2.0), 1.0);
        assert_eq!(penalty_f(3.0, 2.0), 0.0);
        assert_eq!(penalty_f(2.0, 2.0), 0.0);
        assert_eq!(penalty_f_grad(2.0, 2.0), (0.0, 0.0));
        assert_eq!(penalty_f_grad(2.0 + 1e-300, 2.0), (0.0, 0.0));
    }

    #[test]
    fn ranges_for_cubic() {
        let r = CostRanges::new(3, 10);
        assert_eq!(r.smoothness, 2..=8);
        assert_eq!(r.collision, 3..=7);
        assert_eq!(r.velocity, 2..=7);
        assert_eq!(r.acceleration, 1..=7);
        assert_eq!(r.terrain, 3..=7);
        assert_eq!(r.free, 3..=7);
    }

    #[test]
    fn second_difference_example() {
        let q = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0, 0.0, 0.0];
        let mut g = [0.0; 9];
        assert_eq!(second_difference_cost(&q, 3, 1..=1, &mut g), 1.0);
    }

    #[test]
    fn collinear_points_are_smooth() {
        let control = (0..8).flat_map(|i| [0.5 * i as f64, 0.2 * i as f64, 1.0]).collect();
        let tr = BSplineTrajectory::new(3, 3, 0.5, control).unwrap();
        let mut g = vec![0.0; 24];
        assert!(Smoothness.evaluate(&tr, &mut g).unwrap() < 1e-24);
    }

    #[test]
    fn velocity_penalty_example() {
        // One segment with q̃² = v_max² + 1 on a single axis.
        let vmax: f64 = 2.0;
        let v = (vmax * vmax + 1.0).sqrt();
        let dt = 0.5;
        let mut control = vec![0.0; 2 * 7];
        for i in 3..7 {
            control[i * 2] = v * dt;
        }
        let tr = BSplineTrajectory::new(2, 3, dt, control).unwrap();
        let mut g = vec![0.0; 14];
        let c = Velocity { limit: vmax }.evaluate(&tr, &mut g).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_dynamic_cost_is_zero() {
        let tr = BSplineTrajectory::new(3, 3, 0.5, vec![1.0; 24]).unwrap();
        let mut g = vec![0.0; 24];
        assert_eq!(Velocity { limit: 1.0 }.evaluate(&tr, &mut g).unwrap(), 0.0);
        assert_eq!(Acceleration { limit: 1.0 }.evaluate(&tr, &mut g).unwrap(), 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_term_terrain_example() {
        let features = RandomFeatureMap::from_parts(2, vec![1.0, 0.0], vec![0.0], Activation::Sine, 0, 1.0).unwrap();
        let field = ParametricField::new(
            FieldKind::Terrain,
            features,
            FeatureProjection::Identity { dim: 1 },
            LinearHead {
                weights: vec![1.0],
                task: Task::Regression,
            },
        )
        .unwrap();
        let q = [std::f64::consts::FRAC_PI_4, 0.0];
        let (c, g) = terrain_penalty(&field, &q).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!((g[0] + 1.0).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn registry_rejects_unknown_and_missing_fields() {
        let reg = CostRegistry::default();
        let cfg = TrajectoryCostConfig::default();
        let fields = CostFields::default();
        assert!(reg.create("nope", &cfg, &fields).is_err());
        assert!(reg.create("collision", &cfg, &fields).is_err());
        assert!(reg.create("terrain", &cfg, &fields).is_err());
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            ["acceleration", "collision", "smoothness", "terrain", "velocity"]
        );
    }
}
