#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmrp_core::field::{FieldConfig, FieldKind, ParametricField};
use rmrp_core::linear::LinearHead;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A field with random head weights of unit-order output.
pub fn random_field(kind: FieldKind, projection_dim: Option<usize>, seed: u64) -> ParametricField {
    let cfg = FieldConfig {
        feature_dim: 64,
        projection_dim,
        feature_scale: 2.0,
        feature_seed: seed,
        projection_seed: seed + 1,
        ..Default::default()
    };
    let mut field = cfg.build_basis(kind).unwrap();
    let mut r = rng(seed ^ 0xABCD);
    let k = field.head().len();
    let weights = (0..k).map(|_| (2.0 * r.random::<f64>() - 1.0) / (k as f64).sqrt()).collect();
    field
        .set_head(LinearHead {
            weights,
            task: kind.task(),
        })
        .unwrap();
    field
}

pub fn random_point(r: &mut ChaCha8Rng, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| half_width * (2.0 * r.random::<f64>() - 1.0)).collect()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / nb.max(floor)
}
