//! Versioned little-endian checkpoint for a trained field and, optionally,
//! its AdamW state.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic        4 bytes  "RMRP"
//! version      u16      = 1
//! kind         u8       0 occupancy, 1 esdf, 2 terrain
//! task         u8       0 classification, 1 regression
//! activation   u8       0 sine
//! proj_kind    u8       0 identity, 1 sparse
//! input_dim    u32
//! M            u32      feature dimension
//! k            u32      head length
//! s            f64      sparsity (1.0 for identity)
//! scale        f64      weight support
//! feat_seed    u64
//! proj_seed    u64
//! nnz          u64      stored projection entries (0 for identity)
//! W            M·input_dim f64, row-major
//! b            M f64
//! R            nnz × (row u32, col u32, sign i8), row-major order
//! head         k f64
//! has_opt      u8
//! [optimizer]  step u64, lr f64, decay f64, rate1 f64, rate2 f64, eps f64,
//!              m k f64, v k f64
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{Activation, RandomFeatureMap};
use crate::field::{FieldKind, ParametricField};
use crate::linear::{AdamWConfig, AdamWState, LinearHead, Task};
use crate::projection::{FeatureProjection, SparseProjection, Triplet};

pub const MAGIC: &[u8; 4] = b"RMRP";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub field: ParametricField,
    pub optimizer: Option<AdamWState>,
}

impl Checkpoint {
    pub fn new(field: ParametricField) -> Self {
        Self { field, optimizer: None }
    }

    pub fn with_optimizer(field: ParametricField, optimizer: AdamWState) -> Self {
        Self {
            field,
            optimizer: Some(optimizer),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.field;
        let feats = f.features();
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(f.kind().code());
        w.u8(f.head().task.code());
        w.u8(feats.activation().code());
        let (proj_kind, sparsity, proj_seed, nnz) = match f.projection() {
            FeatureProjection::Identity { .. } => (0u8, 1.0, 0u64, 0u64),
            FeatureProjection::Sparse(r) => (1u8, r.sparsity(), r.seed(), r.nnz() as u64),
        };
        w.u8(proj_kind);
        w.u32(feats.input_dim() as u32);
        w.u32(feats.feature_dim() as u32);
        w.u32(f.head().len() as u32);
        w.f64(sparsity);
        w.f64(feats.scale());
        w.u64(feats.seed());
        w.u64(proj_seed);
        w.u64(nnz);
        feats.weights().iter().for_each(|&v| w.f64(v));
        feats.biases().iter().for_each(|&v| w.f64(v));
        if let FeatureProjection::Sparse(r) = f.projection() {
            for t in r.triplets() {
                w.u32(t.row);
                w.u32(t.col);
                w.u8(t.sign as u8);
            }
        }
        f.head().weights.iter().for_each(|&v| w.f64(v));
        match &self.optimizer {
            None => w.u8(0),
            Some(st) => {
                w.u8(1);
                w.u64(st.step);
                w.f64(st.config.learning_rate);
                w.f64(st.config.weight_decay);
                w.f64(st.config.rate1);
                w.f64(st.config.rate2);
                w.f64(st.config.epsilon);
                st.first_moment.iter().for_each(|&v| w.f64(v));
                st.second_moment.iter().for_each(|&v| w.f64(v));
            }
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let kind = FieldKind::from_code(r.u8()?).ok_or_else(|| bad("unknown field kind"))?;
        let task = Task::from_code(r.u8()?).ok_or_else(|| bad("unknown task"))?;
        let activation = Activation::from_code(r.u8()?).ok_or_else(|| bad("unknown activation"))?;
        let proj_kind = r.u8()?;
        let input_dim = r.u32()? as usize;
        let feature_dim = r.u32()? as usize;
        let head_len = r.u32()? as usize;
        let sparsity = r.f64()?;
        let scale = r.f64()?;
        let feat_seed = r.u64()?;
        let proj_seed = r.u64()?;
        let nnz = r.u64()? as usize;
        // Bound allocations by what the buffer can actually hold.
        let need = (feature_dim.saturating_mul(input_dim + 1)).saturating_mul(8);
        if need > r.remaining() {
            return Err(bad("truncated feature block"));
        }
        let weights = r.f64s(feature_dim * input_dim)?;
        let biases = r.f64s(feature_dim)?;
        let features = RandomFeatureMap::from_parts(input_dim, weights, biases, activation, feat_seed, scale)?;
        let projection = match proj_kind {
            0 => {
                if nnz != 0 {
                    return Err(bad("identity projection with stored entries"));
                }
                FeatureProjection::Identity { dim: feature_dim }
            }
            1 => {
                if nnz.saturating_mul(9) > r.remaining() {
                    return Err(bad("truncated projection block"));
                }
                let mut triplets = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let row = r.u32()?;
                    let col = r.u32()?;
                    let sign = r.u8()? as i8;
                    triplets.push(Triplet { row, col, sign });
                }
                FeatureProjection::Sparse(SparseProjection::from_triplets(
                    head_len,
                    feature_dim,
                    sparsity,
                    proj_seed,
                    triplets,
                )?)
            }
            other => return Err(bad(format!("unknown projection kind {other}"))),
        };
        if head_len.saturating_mul(8) > r.remaining() {
            return Err(bad("truncated head"));
        }
        let head = LinearHead {
            weights: r.f64s(head_len)?,
            task,
        };
        let field = ParametricField::new(kind, features, projection, head)?;
        let optimizer = match r.u8()? {
            0 => None,
            1 => {
                let step = r.u64()?;
                let config = AdamWConfig {
                    learning_rate: r.f64()?,
                    weight_decay: r.f64()?,
                    rate1: r.f64()?,
                    rate2: r.f64()?,
                    epsilon: r.f64()?,
                };
                if head_len.saturating_mul(16) > r.remaining() {
                    return Err(bad("truncated optimizer state"));
                }
                Some(AdamWState {
                    config,
                    first_moment: r.f64s(head_len)?,
                    second_moment: r.f64s(head_len)?,
                    step,
                })
            }
            other => return Err(bad(format!("bad optimizer flag {other}"))),
        };
        if r.remaining() != 0 {
            return Err(bad(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self { field, optimizer })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(bad("unexpected end of data"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}
