//! Back-end: B-spline trajectory optimization over parametric fields.

pub mod bspline;
pub mod costs;
pub mod optimizer;

pub use bspline::{BSplineTrajectory, TrajectorySample};
pub use costs::{
    penalty_f, penalty_f_grad, terrain_penalty, CostFields, CostRanges, CostRegistry, CostTerm, TrajectoryCostConfig,
    TrajectoryObjective,
};
pub use optimizer::{minimize, optimize_trajectory, MinimizeOutcome, OptimizerConfig, StopReason, TrajectoryOutcome};
