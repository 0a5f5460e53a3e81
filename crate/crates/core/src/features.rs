//! Random feature lift `x -> g(W x + b)` with a frozen, seed-determined basis.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};

/// Element-wise nonlinearity applied to the feature phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Activation {
    #[default]
    Sine,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Sine => 0,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Sine),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sine => z.sin(),
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Sine => z.cos(),
        }
    }

    #[inline]
    pub fn second_derivative(self, z: f64) -> f64 {
        match self {
            Activation::Sine => -z.sin(),
        }
    }
}

/// The random lift. Weights are stored row-major, one row of length
/// `input_dim` per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureMap {
    input_dim: usize,
    feature_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: Activation,
    seed: u64,
    scale: f64,
}

impl RandomFeatureMap {
    /// Draws `W ~ U[-scale, scale]` and `b ~ U[0, 2π)` from a ChaCha stream
    /// keyed by `seed`. Weights are drawn first (row-major), then biases.
    pub fn build(input_dim: usize, feature_dim: usize, seed: u64, scale: f64) -> Result<Self> {
        if !(input_dim == 2 || input_dim == 3) {
            return Err(invalid("input_dim", format!("must be 2 or 3, got {input_dim}")));
        }
        if feature_dim == 0 {
            return Err(invalid("feature_dim", "must be at least 1"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid("scale", format!("must be positive and finite, got {scale}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..feature_dim * input_dim)
            .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let biases = (0..feature_dim).map(|_| TAU * rng.random::<f64>()).collect();
        Ok(Self {
            input_dim,
            feature_dim,
            weights,
            biases,
            activation: Activation::Sine,
            seed,
            scale,
        })
    }

    /// Assembles a map from explicit parameters (used by checkpoints and tests).
    pub fn from_parts(
        input_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
        seed: u64,
        scale: f64,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(invalid("input_dim", "must be positive"));
        }
        let feature_dim = biases.len();
        if feature_dim == 0 {
            return Err(invalid("feature_dim", "must be at least 1"));
        }
        check_dim(feature_dim * input_dim, weights.len())?;
        Ok(Self {
            input_dim,
            feature_dim,
            weights,
            biases,
            activation,
            seed,
            scale,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Row `i` of `W`.
    #[inline]
    pub fn weight_row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.input_dim..(i + 1) * self.input_dim]
    }

    /// Phase `W_i · x + b_i`. No dimension check.
    #[inline]
    pub(crate) fn phase(&self, i: usize, x: &[f64]) -> f64 {
        let row = self.weight_row(i);
        let mut z = self.biases[i];
        for (w, v) in row.iter().zip(x) {
            z += w * v;
        }
        z
    }

    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.feature_dim];
        self.lift_into(x, &mut out)?;
        Ok(out)
    }

    pub fn lift_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(self.input_dim, x.len())?;
        check_dim(self.feature_dim, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.activation.apply(self.phase(i, x));
        }
        Ok(())
    }

    /// `M × input_dim` Jacobian of the lift; row `i` is `g'(W_i·x + b_i) W_i`.
    pub fn lift_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.input_dim, x.len())?;
        let mut jac = DMatrix::zeros(self.feature_dim, self.input_dim);
        for i in 0..self.feature_dim {
            let d = self.activation.derivative(self.phase(i, x));
            for (j, w) in self.weight_row(i).iter().enumerate() {
                jac[(i, j)] = d * w;
            }
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn single_row(row: [f64; 3], bias: f64) -> RandomFeatureMap {
        RandomFeatureMap::from_parts(3, row.to_vec(), vec![bias], Activation::Sine, 0, 1.0).unwrap()
    }

    #[test]
    fn build_has_expected_shapes() {
        let map = RandomFeatureMap::build(3, 100, 42, 1.0).unwrap();
        assert_eq!(map.weights().len(), 100 * 3);
        assert_eq!(map.biases().len(), 100);
        assert!(map.biases().iter().all(|&b| (0.0..TAU).contains(&b)));
    }

    #[test]
    fn build_is_deterministic() {
        let a = RandomFeatureMap::build(2, 1, 0, 1.0).unwrap();
        let b = RandomFeatureMap::build(2, 1, 0, 1.0).unwrap();
        assert_eq!(a, b);
        let bits = |m: &RandomFeatureMap| m.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn weights_respect_support() {
        let map = RandomFeatureMap::build(3, 4, 7, 2.0).unwrap();
        assert!(map.weights().iter().all(|w| w.abs() <= 2.0));
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(RandomFeatureMap::build(3, 0, 1, 1.0).is_err());
        assert!(RandomFeatureMap::build(3, 10, 1, 0.0).is_err());
        assert!(RandomFeatureMap::build(3, 10, 1, -1.0).is_err());
        assert!(RandomFeatureMap::build(4, 10, 1, 1.0).is_err());
    }

    #[test]
    fn lift_of_zero_with_zero_bias_is_zero() {
        let map = RandomFeatureMap::from_parts(
            3,
            vec![0.3, -0.2, 1.0, 0.5, 0.5, 0.5],
            vec![0.0, 0.0],
            Activation::Sine,
            0,
            1.0,
        )
        .unwrap();
        assert_eq!(map.lift(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn lift_single_row_hits_peak() {
        let map = single_row([1.0, 0.0, 0.0], 0.0);
        let s = map.lift(&[FRAC_PI_2, 5.0, -3.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lift_matches_scalar_reevaluation() {
        let map = RandomFeatureMap::build(3, 4, 11, 1.0).unwrap();
        let x = [1.0, 2.0, 0.5];
        let s = map.lift(&x).unwrap();
        for i in 0..4 {
            let w = &map.weights()[3 * i..3 * i + 3];
            let expected = (w[0] * 1.0 + w[1] * 2.0 + w[2] * 0.5 + map.biases()[i]).sin();
            assert!((s[i] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn lift_rejects_wrong_dimension() {
        let map = RandomFeatureMap::build(3, 4, 1, 1.0).unwrap();
        assert!(map.lift(&[1.0, 2.0]).is_err());
        assert!(map.lift_jacobian(&[1.0]).is_err());
    }

    #[test]
    fn jacobian_at_origin_is_weight_row() {
        let map = single_row([1.0, 0.0, 0.0], 0.0);
        let j = map.lift_jacobian(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(j.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn jacobian_vanishes_for_zero_weights() {
        let map = RandomFeatureMap::from_parts(3, vec![0.0; 6], vec![0.3, 1.2], Activation::Sine, 0, 1.0)
            .unwrap();
        let j = map.lift_jacobian(&[0.4, -2.0, 9.0]).unwrap();
        assert!(j.iter().all(|&v| v == 0.0));
    }
}
