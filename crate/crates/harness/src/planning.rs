//! End-to-end planning pipelines over trained fields.

use std::time::Instant;

use anyhow::{Context, Result};
use rmrp_core::backend::{
    optimize_trajectory, BSplineTrajectory, CostFields, OptimizerConfig, TrajectoryCostConfig, TrajectoryObjective,
    TrajectoryOutcome, TrajectorySample,
};
use rmrp_core::frontend::{refine_path, search_initial_path, RefinementConfig, RefinementOutcome, SearchConfig, SearchOutcome, WaypointPath};
use rmrp_core::geometry::{polyline_length, Point3};
use rmrp_core::ParametricField;
use serde::{Deserialize, Serialize};

use crate::metrics::{count_pit_points, energy_proxy, min_clearance};
use crate::scene::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub search: SearchConfig,
    pub refinement: RefinementConfig,
    pub costs: TrajectoryCostConfig,
    pub optimizer: OptimizerConfig,
    /// Target spacing of the seeded control polygon (m).
    pub control_spacing: f64,
    pub degree: usize,
    pub dt: f64,
    /// Curve samples used for reporting and metrics.
    pub samples: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig {
                threshold: 0.4,
                ..Default::default()
            },
            refinement: RefinementConfig::default(),
            costs: TrajectoryCostConfig::default(),
            optimizer: OptimizerConfig::default(),
            control_spacing: 0.4,
            degree: 3,
            dt: 0.5,
            samples: 200,
        }
    }
}

/// Control polygon seeded from waypoints: the path resampled at roughly
/// `control_spacing`, with each endpoint repeated `degree − 1` extra times so
/// the curve starts and ends at rest on them.
pub fn seed_trajectory(path: &WaypointPath, dim: usize, cfg: &PlannerConfig) -> Result<BSplineTrajectory> {
    let count = ((path.length() / cfg.control_spacing).ceil() as usize + 1).max(2);
    let resampled = path.resample(count)?;
    let pts = resampled.points();
    let pad = cfg.degree.saturating_sub(1);
    let mut control = Vec::with_capacity((count + 2 * pad) * dim);
    let mut push = |p: &Point3| control.extend_from_slice(&p[..dim]);
    for _ in 0..pad {
        push(&pts[0]);
    }
    pts.iter().for_each(&mut push);
    for _ in 0..pad {
        push(&pts[count - 1]);
    }
    Ok(BSplineTrajectory::new(dim, cfg.degree, cfg.dt, control)?)
}

#[derive(Debug, Clone)]
pub struct FrontendPlan {
    pub search: SearchOutcome,
    pub refined: RefinementOutcome,
    pub search_seconds: f64,
    pub refine_seconds: f64,
}

pub fn plan_frontend(occupancy: &ParametricField, start: Point3, goal: Point3, cfg: &PlannerConfig) -> Result<FrontendPlan> {
    let t = Instant::now();
    let search = search_initial_path(occupancy, start, goal, &cfg.search).context("lattice search")?;
    let search_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let refined = refine_path(&search.path, occupancy, &cfg.refinement).context("path refinement")?;
    Ok(FrontendPlan {
        search,
        refined,
        search_seconds,
        refine_seconds: t.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    pub frontend: Option<FrontendPlan>,
    pub initial: BSplineTrajectory,
    pub outcome: TrajectoryOutcome,
    pub samples: Vec<TrajectorySample>,
    pub backend_seconds: f64,
}

impl TrajectoryPlan {
    pub fn total_seconds(&self) -> f64 {
        self.backend_seconds
            + self
                .frontend
                .as_ref()
                .map_or(0.0, |f| f.search_seconds + f.refine_seconds)
    }
}

/// A* on the occupancy field, gradient refinement, then B-spline optimization
/// against the ESDF field.
pub fn plan_uav(
    occupancy: &ParametricField,
    esdf: &ParametricField,
    start: Point3,
    goal: Point3,
    cfg: &PlannerConfig,
) -> Result<TrajectoryPlan> {
    let frontend = plan_frontend(occupancy, start, goal, cfg)?;
    let mut plan = optimize_from_path(&frontend.refined.path, 3, Some(esdf), None, cfg)?;
    plan.frontend = Some(frontend);
    Ok(plan)
}

/// Ground-vehicle plan: 2-D control points seeded on the straight segment,
/// optimized with the terrain term (and collision when an ESDF is given).
/// Positions in the samples carry the terrain elevation as `z`.
pub fn plan_ugv(
    terrain: &ParametricField,
    esdf: Option<&ParametricField>,
    start: Point3,
    goal: Point3,
    cfg: &PlannerConfig,
) -> Result<TrajectoryPlan> {
    let path = WaypointPath::new(vec![[start[0], start[1], 0.0], [goal[0], goal[1], 0.0]])?;
    let mut plan = optimize_from_path(&path, 2, esdf, Some(terrain), cfg)?;
    for s in &mut plan.samples {
        s.position[2] = terrain.value(&s.position[..2])?;
    }
    Ok(plan)
}

fn optimize_from_path(
    path: &WaypointPath,
    dim: usize,
    esdf: Option<&ParametricField>,
    terrain: Option<&ParametricField>,
    cfg: &PlannerConfig,
) -> Result<TrajectoryPlan> {
    let t = Instant::now();
    let initial = seed_trajectory(path, dim, cfg)?;
    let fields = CostFields { esdf, terrain };
    let objective = TrajectoryObjective::from_config(&cfg.costs, &fields)?;
    let outcome = optimize_trajectory(&initial, &objective, &cfg.optimizer).context("trajectory optimization")?;
    let backend_seconds = t.elapsed().as_secs_f64();
    let samples = outcome.trajectory.sample(cfg.samples);
    Ok(TrajectoryPlan {
        frontend: None,
        initial,
        outcome,
        samples,
        backend_seconds,
    })
}

/// Ground-truth evaluation of a sampled trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanSummary {
    pub length: f64,
    /// Exact obstacle distance minimized over samples; infinite without obstacles.
    pub min_clearance: f64,
    pub n_pit: usize,
    pub energy: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
    /// Our definition: the curve ends within `goal_tolerance` of the goal and
    /// no sample is closer to an obstacle than `clearance_floor`.
    pub success: bool,
}

pub fn summarize(scene: &Scene, plan: &TrajectoryPlan, goal: Point3, clearance_floor: f64, goal_tolerance: f64) -> PlanSummary {
    let dim = plan.outcome.trajectory.dim();
    let pts: Vec<Point3> = plan
        .samples
        .iter()
        .map(|s| if dim == 2 { [s.position[0], s.position[1], scene_mid_height(scene)] } else { s.position })
        .collect();
    let xy: Vec<Point3> = plan.samples.iter().map(|s| s.position).collect();
    let length = polyline_length(&xy);
    let clearance = min_clearance(scene, pts.iter().map(|p| &p[..]));
    let n_pit = scene
        .terrain
        .as_ref()
        .map_or(0, |t| count_pit_points(t, pts.iter().map(|p| &p[..])));
    let end = plan.samples.last().map_or(goal, |s| s.position);
    let reached = (0..dim).map(|a| (end[a] - goal[a]).powi(2)).sum::<f64>().sqrt() <= goal_tolerance;
    PlanSummary {
        length,
        min_clearance: clearance,
        n_pit,
        energy: energy_proxy(&plan.samples),
        iterations: plan.outcome.iterations,
        wall_seconds: plan.total_seconds(),
        success: reached && clearance >= clearance_floor,
    }
}

fn scene_mid_height(scene: &Scene) -> f64 {
    0.5 * (scene.bounds.min[2] + scene.bounds.max[2])
}

/// `t,x,y,z,v,a` rows with speed and acceleration magnitudes.
pub fn samples_csv(samples: &[TrajectorySample]) -> String {
    let mut s = String::from("t,x,y,z,v,a\n");
    for p in samples {
        let v = p.velocity.iter().map(|c| c * c).sum::<f64>().sqrt();
        let a = p.acceleration.iter().map(|c| c * c).sum::<f64>().sqrt();
        s.push_str(&format!(
            "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9}\n",
            p.t, p.position[0], p.position[1], p.position[2], v, a
        ));
    }
    s
}

pub fn trace_csv(trace: &[f64]) -> String {
    let mut s = String::from("iteration,cost\n");
    for (i, c) in trace.iter().enumerate() {
        s.push_str(&format!("{i},{c:.12e}\n"));
    }
    s
}
