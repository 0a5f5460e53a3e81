mod common;

use common::{fd_gradient, random_field, rel_err};
use rand::Rng;
use rmrp_core::backend::{
    optimize_trajectory, terrain_penalty, BSplineTrajectory, CostFields, OptimizerConfig, TrajectoryCostConfig,
    TrajectoryObjective,
};
use rmrp_core::field::FieldKind;
use rmrp_core::linear::LinearHead;

fn wiggly(dim: usize, n: usize, seed: u64, spread: f64) -> BSplineTrajectory {
    let mut r = common::rng(seed);
    let control = (0..n)
        .flat_map(|i| {
            let mut p = vec![0.4 * i as f64; dim];
            for v in p.iter_mut() {
                *v += spread * (2.0 * r.random::<f64>() - 1.0);
            }
            p
        })
        .collect();
    BSplineTrajectory::new(dim, 3, 0.1, control).unwrap()
}

fn check_objective(obj: &TrajectoryObjective<'_>, tr: &BSplineTrajectory, tol: f64) {
    let mut g = vec![0.0; tr.control().len()];
    obj.evaluate(tr, &mut g).unwrap();
    let fd = fd_gradient(tr.control(), 1e-6, |x| {
        let t = BSplineTrajectory::new(tr.dim(), tr.degree(), tr.dt(), x.to_vec()).unwrap();
        let mut scratch = vec![0.0; x.len()];
        obj.evaluate(&t, &mut scratch).unwrap()
    });
    let err = rel_err(&g, &fd, 1e-3);
    assert!(err <= tol, "{:?}: {err:e}", obj.term_names());
}

#[test]
fn uav_objective_gradient_matches_finite_differences() {
    let mut esdf = random_field(FieldKind::Esdf, Some(32), 4);
    // Shift the head so that distances hover around the clearance.
    let mut head = esdf.head().clone();
    head.weights.iter_mut().for_each(|w| *w *= 3.0);
    esdf.set_head(head).unwrap();
    let cfg = TrajectoryCostConfig {
        clearance: 0.3,
        max_velocity: 3.0,
        max_acceleration: 20.0,
        ..Default::default()
    };
    let fields = CostFields {
        esdf: Some(&esdf),
        terrain: None,
    };
    let obj = TrajectoryObjective::from_config(&cfg, &fields).unwrap();
    assert_eq!(obj.term_names(), ["smoothness", "collision", "velocity", "acceleration"]);
    for seed in 0..10 {
        let tr = wiggly(3, 12, seed, 0.2);
        let b = obj.breakdown(&tr).unwrap();
        assert!(b.iter().all(|(_, v)| *v > 0.0), "{b:?}");
        check_objective(&obj, &tr, 1e-4);
    }
}

#[test]
fn ugv_objective_gradient_matches_finite_differences() {
    let terrain = random_field(FieldKind::Terrain, None, 8);
    let cfg = TrajectoryCostConfig {
        max_velocity: 3.0,
        max_acceleration: 20.0,
        ..Default::default()
    };
    let fields = CostFields {
        esdf: None,
        terrain: Some(&terrain),
    };
    let obj = TrajectoryObjective::from_config(&cfg, &fields).unwrap();
    assert_eq!(obj.term_names(), ["smoothness", "velocity", "acceleration", "terrain"]);
    for seed in 0..10 {
        check_objective(&obj, &wiggly(2, 12, seed, 0.2), 1e-4);
    }
}

#[test]
fn terrain_closed_form_equals_hessian_route() {
    let terrain = random_field(FieldKind::Terrain, None, 3);
    let mut r = common::rng(4);
    for _ in 0..100 {
        let q = common::random_point(&mut r, 2, 3.0);
        let (cost, g) = terrain_penalty(&terrain, &q).unwrap();
        let (slope, h) = terrain.gradient_and_hessian(&q).unwrap();
        assert!((cost - slope.iter().map(|v| v * v).sum::<f64>()).abs() < 1e-12);
        for a in 0..2 {
            let route = 2.0 * (h[a * 2] * slope[0] + h[a * 2 + 1] * slope[1]);
            assert!((route - g[a]).abs() < 1e-10);
        }
    }
}

#[test]
fn zero_terrain_weights_cost_nothing() {
    let mut terrain = random_field(FieldKind::Terrain, None, 3);
    terrain.set_head(LinearHead::zeros(terrain.head().len(), terrain.head().task)).unwrap();
    let (c, g) = terrain_penalty(&terrain, &[0.3, -0.2]).unwrap();
    assert_eq!((c, g), (0.0, [0.0, 0.0]));
}

#[test]
fn optimization_is_monotone_and_reduces_cost() {
    let terrain = random_field(FieldKind::Terrain, None, 12);
    let cfg = TrajectoryCostConfig::default();
    let fields = CostFields {
        esdf: None,
        terrain: Some(&terrain),
    };
    let obj = TrajectoryObjective::from_config(&cfg, &fields).unwrap();
    let tr = wiggly(2, 16, 1, 0.1);
    let out = optimize_trajectory(&tr, &obj, &OptimizerConfig::default()).unwrap();
    assert!(out.cost_trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(out.cost_trace.last().unwrap() < &out.cost_trace[0]);
    assert_eq!(&out.trajectory.control()[..6], &tr.control()[..6]);
    assert_eq!(&out.trajectory.control()[26..], &tr.control()[26..]);
}
