mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rmrp_core::linear::{
    adamw_step, ridge_objective, ridge_solve, streaming_gradient, AdamWConfig, AdamWState, LinearHead, RidgeConfig, Task,
};

fn problem(seed: u64, k: usize, l: usize) -> (DMatrix<f64>, Vec<f64>) {
    let mut r = common::rng(seed);
    let s = DMatrix::from_fn(k, l, |_, _| 2.0 * r.random::<f64>() - 1.0);
    let t = (0..l).map(|_| r.random::<f64>()).collect();
    (s, t)
}

#[test]
fn ridge_is_locally_optimal() {
    let (s, t) = problem(3, 12, 80);
    let cfg = RidgeConfig { alpha: 0.1 };
    let head = ridge_solve(&s, &t, &cfg, Task::Regression).unwrap();
    let best = ridge_objective(&s, &t, &head.weights, cfg.alpha);
    let mut r = common::rng(4);
    for _ in 0..100 {
        let w: Vec<f64> = head.weights.iter().map(|w| w + 1e-3 * (2.0 * r.random::<f64>() - 1.0)).collect();
        assert!(best <= ridge_objective(&s, &t, &w, cfg.alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ridge_ignores_column_order(seed in 0u64..1000, shift in 1usize..59) {
        let (s, t) = problem(seed, 6, 60);
        let cfg = RidgeConfig::default();
        let a = ridge_solve(&s, &t, &cfg, Task::Regression).unwrap();
        let perm: Vec<usize> = (0..60).map(|i| (i * 7 + shift) % 60).collect();
        let sp = DMatrix::from_fn(6, 60, |r, c| s[(r, perm[c])]);
        let tp: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
        let b = ridge_solve(&sp, &tp, &cfg, Task::Regression).unwrap();
        let scale = a.weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        for (x, y) in a.weights.iter().zip(&b.weights) {
            prop_assert!((x - y).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn adamw_decreases_single_sample_loss(seed in 0u64..1000) {
        let mut r = common::rng(seed);
        let s: Vec<f64> = (0..10).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
        let target = 2.0 * r.random::<f64>() - 1.0 + 3.0;
        let cfg = AdamWConfig { learning_rate: 1e-3, weight_decay: 0.0, ..Default::default() };
        let mut head = LinearHead::zeros(10, Task::Regression);
        let mut st = AdamWState::new(10, cfg).unwrap();
        let loss = |h: &LinearHead| 0.5 * (target - h.score(&s).unwrap()).powi(2);
        let mut prev = loss(&head);
        for _ in 0..100 {
            let g = streaming_gradient(&head, &s, target).unwrap();
            adamw_step(&mut head, &mut st, &g).unwrap();
            let l = loss(&head);
            prop_assert!(l <= prev, "{l} > {prev}");
            prev = l;
        }
    }
}
