//! Sparse `{0, ±1}`-valued random projection (Achlioptas parameterization).
//!
//! Each entry is `+sqrt(s/k)` with probability `1/(2s)`, `-sqrt(s/k)` with
//! probability `1/(2s)` and zero otherwise, so every column has unit expected
//! energy. Nonzeros are kept in compressed-row form so that `R v` costs one
//! multiply-add per stored entry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseProjection {
    rows: usize,
    cols: usize,
    sparsity: f64,
    seed: u64,
    scale: f64,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    signs: Vec<i8>,
}

/// One stored nonzero of `R` before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triplet {
    pub row: u32,
    pub col: u32,
    pub sign: i8,
}

impl SparseProjection {
    /// Draws a `rows × cols` matrix. Entries are visited row-major, one
    /// uniform draw each.
    pub fn build(rows: usize, cols: usize, sparsity: f64, seed: u64) -> Result<Self> {
        if rows == 0 {
            return Err(invalid("rows", "must be at least 1"));
        }
        if rows > cols {
            return Err(invalid(
                "rows",
                format!("projection must reduce: k = {rows} > M = {cols}"),
            ));
        }
        if !(sparsity >= 1.0) || !sparsity.is_finite() {
            return Err(invalid("sparsity", format!("must be >= 1, got {sparsity}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 0.5 / sparsity;
        let full = 1.0 / sparsity;
        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::new();
        let mut signs = Vec::new();
        row_offsets.push(0);
        for _ in 0..rows {
            for j in 0..cols {
                let u: f64 = rng.random();
                if u < half {
                    col_indices.push(j as u32);
                    signs.push(1);
                } else if u < full {
                    col_indices.push(j as u32);
                    signs.push(-1);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            rows,
            cols,
            sparsity,
            seed,
            scale: (sparsity / rows as f64).sqrt(),
            row_offsets,
            col_indices,
            signs,
        })
    }

    /// Rebuilds a projection from stored triplets. Triplets may arrive in any
    /// order; they are sorted row-major.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        sparsity: f64,
        seed: u64,
        mut triplets: Vec<Triplet>,
    ) -> Result<Self> {
        if rows == 0 || rows > cols {
            return Err(invalid("rows", format!("need 1 <= k <= M, got k = {rows}, M = {cols}")));
        }
        if !(sparsity >= 1.0) {
            return Err(invalid("sparsity", format!("must be >= 1, got {sparsity}")));
        }
        triplets.sort_by_key(|t| (t.row, t.col));
        if triplets.windows(2).any(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col)) {
            return Err(invalid("triplets", "duplicate entry"));
        }
        let mut row_offsets = vec![0usize; rows + 1];
        for t in &triplets {
            if t.row as usize >= rows || t.col as usize >= cols || !(t.sign == 1 || t.sign == -1) {
                return Err(invalid("triplets", format!("bad entry {t:?}")));
            }
            row_offsets[t.row as usize + 1] += 1;
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self {
            rows,
            cols,
            sparsity,
            seed,
            scale: (sparsity / rows as f64).sqrt(),
            row_offsets,
            col_indices: triplets.iter().map(|t| t.col).collect(),
            signs: triplets.iter().map(|t| t.sign).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Magnitude of every stored entry, `sqrt(s/k)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_offsets[r]..self.row_offsets[r + 1]).map(move |e| Triplet {
                row: r as u32,
                col: self.col_indices[e],
                sign: self.signs[e],
            })
        })
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.project_into(v, &mut out)?;
        Ok(out)
    }

    pub fn project_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(self.cols, v.len())?;
        check_dim(self.rows, out.len())?;
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for e in self.row_offsets[r]..self.row_offsets[r + 1] {
                // Branch-free: signs are random, so a branch mispredicts half the time.
                acc += f64::from(self.signs[e]) * v[self.col_indices[e] as usize];
            }
            *o = self.scale * acc;
        }
        Ok(())
    }

    /// `R^T w`.
    pub fn transpose_apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows, w.len())?;
        let mut out = vec![0.0; self.cols];
        for (r, &wr) in w.iter().enumerate() {
            let sw = self.scale * wr;
            for e in self.row_offsets[r]..self.row_offsets[r + 1] {
                out[self.col_indices[e] as usize] += f64::from(self.signs[e]) * sw;
            }
        }
        Ok(out)
    }

    /// Column `j` of `R` as a dense vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let range = self.row_offsets[r]..self.row_offsets[r + 1];
            if let Ok(pos) = self.col_indices[range.clone()].binary_search(&(j as u32)) {
                out[r] = self.scale * f64::from(self.signs[range.start + pos]);
            }
        }
        out
    }

    /// Dense `rows × cols` copy, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for t in self.triplets() {
            out[t.row as usize * self.cols + t.col as usize] = self.scale * f64::from(t.sign);
        }
        out
    }
}

/// How lifted features reach the linear head: straight through, or via a
/// sparse random projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureProjection {
    Identity { dim: usize },
    Sparse(SparseProjection),
}

impl FeatureProjection {
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureProjection::Identity { dim } => *dim,
            FeatureProjection::Sparse(r) => r.cols(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureProjection::Identity { dim } => *dim,
            FeatureProjection::Sparse(r) => r.rows(),
        }
    }

    pub fn project_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            FeatureProjection::Identity { dim } => {
                check_dim(*dim, v.len())?;
                check_dim(*dim, out.len())?;
                out.copy_from_slice(v);
                Ok(())
            }
            FeatureProjection::Sparse(r) => r.project_into(v, out),
        }
    }

    pub fn transpose_apply(&self, w: &[f64]) -> Result<Vec<f64>> {
        match self {
            FeatureProjection::Identity { dim } => {
                check_dim(*dim, w.len())?;
                Ok(w.to_vec())
            }
            FeatureProjection::Sparse(r) => r.transpose_apply(w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_magnitudes_and_density() {
        let r = SparseProjection::build(50, 100, 3.0, 1).unwrap();
        assert!((r.scale() - (3.0f64 / 50.0).sqrt()).abs() < 1e-15);
        let dense = r.to_dense();
        assert!(dense
            .iter()
            .all(|&v| v == 0.0 || (v.abs() - r.scale()).abs() < 1e-15));
        // 5000 Bernoulli(1/3) draws: 3 sd ~ 100.
        let expected = 5000.0 / 3.0;
        let sd = (5000.0f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        assert!((r.nnz() as f64 - expected).abs() <= 3.0 * sd);
    }

    #[test]
    fn unit_sparsity_is_dense_sign_matrix() {
        let r = SparseProjection::build(8, 20, 1.0, 3).unwrap();
        assert_eq!(r.nnz(), 160);
        let inv = 1.0 / (8.0f64).sqrt();
        assert!(r.to_dense().iter().all(|v| (v.abs() - inv).abs() < 1e-15));
    }

    #[test]
    fn project_zero_is_zero() {
        let r = SparseProjection::build(10, 40, 3.0, 9).unwrap();
        assert_eq!(r.project(&vec![0.0; 40]).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn project_basis_vector_extracts_column() {
        let r = SparseProjection::build(12, 30, 3.0, 5).unwrap();
        for j in [0, 7, 29] {
            let mut e = vec![0.0; 30];
            e[j] = 1.0;
            assert_eq!(r.project(&e).unwrap(), r.column(j));
        }
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(SparseProjection::build(11, 10, 3.0, 0).is_err());
        assert!(SparseProjection::build(5, 10, 0.5, 0).is_err());
        assert!(SparseProjection::build(0, 10, 3.0, 0).is_err());
        let r = SparseProjection::build(5, 10, 3.0, 0).unwrap();
        assert!(r.project(&[1.0; 9]).is_err());
    }

    #[test]
    fn transpose_matches_dense() {
        let r = SparseProjection::build(6, 15, 2.0, 4).unwrap();
        let w: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let dense = r.to_dense();
        let expected: Vec<f64> = (0..15)
            .map(|c| (0..6).map(|row| dense[row * 15 + c] * w[row]).sum())
            .collect();
        let got = r.transpose_apply(&w).unwrap();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn triplet_round_trip() {
        let r = SparseProjection::build(7, 21, 3.0, 8).unwrap();
        let mut t: Vec<Triplet> = r.triplets().collect();
        t.reverse();
        let back = SparseProjection::from_triplets(7, 21, 3.0, 8, t).unwrap();
        assert_eq!(r, back);
    }
}
