mod common;

use common::{fd_gradient, random_field, random_point, rel_err};
use proptest::prelude::*;
use rand::Rng;
use rmrp_core::checkpoint::Checkpoint;
use rmrp_core::field::{train_occupancy, FieldConfig, FieldKind, TrainingSet};
use rmrp_core::linear::{AdamWConfig, AdamWState, LinearHead};

#[test]
fn gradients_match_finite_differences() {
    for (kind, proj) in [
        (FieldKind::Occupancy, Some(32)),
        (FieldKind::Esdf, Some(32)),
        (FieldKind::Terrain, None),
    ] {
        let field = random_field(kind, proj, 11);
        let mut r = common::rng(2);
        for _ in 0..100 {
            let x = random_point(&mut r, kind.input_dim(), 2.0);
            let an = field.gradient(&x).unwrap();
            let fd = fd_gradient(&x, 1e-5, |p| field.value(p).unwrap());
            let err = rel_err(&an, &fd, 1e-3);
            assert!(err <= 1e-5, "{kind}: {err:e} at {x:?}");
        }
    }
}

#[test]
fn hessian_matches_finite_differences_of_gradient() {
    let field = random_field(FieldKind::Occupancy, Some(40), 5);
    let mut r = common::rng(9);
    for _ in 0..50 {
        let x = random_point(&mut r, 3, 2.0);
        let (_, h) = field.gradient_and_hessian(&x).unwrap();
        for a in 0..3 {
            let fd = fd_gradient(&x, 1e-5, |p| field.gradient(p).unwrap()[a]);
            let row = &h[a * 3..a * 3 + 3];
            assert!(rel_err(row, &fd, 1e-3) <= 1e-5);
        }
        assert!((h[1] - h[3]).abs() < 1e-12 && (h[2] - h[6]).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_is_scale_invariant(
        seed in 0u64..200,
        c in 1e-3f64..1e3,
        tau in -0.5f64..0.5,
        x in prop::array::uniform3(-3f64..3.0),
    ) {
        let field = random_field(FieldKind::Occupancy, Some(32), seed);
        let mut scaled = field.clone();
        scaled.set_head(LinearHead {
            weights: field.head().weights.iter().map(|w| c * w).collect(),
            task: field.head().task,
        }).unwrap();
        let a = field.value(&x).unwrap();
        prop_assume!((a - tau).abs() > 1e-9);
        prop_assert_eq!(a > tau, scaled.value(&x).unwrap() > c * tau);
    }
}

fn blob_data(n: usize, half_width: f64, seed: u64) -> TrainingSet {
    let mut r = common::rng(seed);
    let mut data = TrainingSet::new(3);
    for _ in 0..n {
        let x = random_point(&mut r, 3, half_width);
        let inside = x.iter().map(|v| v * v).sum::<f64>() < (0.4 * half_width).powi(2);
        data.push(&x, if inside { 1.0 } else { 0.0 }).unwrap();
    }
    data
}

#[test]
fn checkpoint_size_ignores_sample_count_and_extent() {
    let cfg = FieldConfig::default();
    let small = train_occupancy(&blob_data(1_000, 2.0, 1), &cfg).unwrap();
    let large = train_occupancy(&blob_data(10_000, 4.0, 2), &cfg).unwrap();
    let a = Checkpoint::new(small).to_bytes().len();
    let b = Checkpoint::new(large).to_bytes().len();
    assert_eq!(a, b);
}

#[test]
fn streamed_obstacle_is_absorbed() {
    // Offline: a free cube. Online: a new obstacle blob in one corner.
    let cfg = FieldConfig {
        feature_scale: 2.0,
        ..Default::default()
    };
    let mut r = common::rng(3);
    let mut data = TrainingSet::new(3);
    for _ in 0..4000 {
        let x = random_point(&mut r, 3, 2.0);
        data.push(&x, 0.0).unwrap();
    }
    data.push(&[5.0, 5.0, 5.0], 1.0).unwrap();
    let mut field = train_occupancy(&data, &cfg).unwrap();
    let center = [1.0, 1.0, 0.5];
    let stream: Vec<[f64; 3]> = (0..500)
        .map(|_| std::array::from_fn(|a| center[a] + 0.15 * (2.0 * r.random::<f64>() - 1.0)))
        .collect();
    let before = stream.iter().filter(|p| field.value(&p[..]).unwrap() > 0.5).count();
    let mut st = AdamWState::new(field.head().len(), AdamWConfig::default()).unwrap();
    for p in &stream {
        field.online_update(p, 1.0, &mut st).unwrap();
    }
    let after = stream.iter().filter(|p| field.value(&p[..]).unwrap() > 0.5).count();
    assert!(before < 50, "{before}");
    assert!(after as f64 >= 0.9 * 500.0, "{after}");
}
