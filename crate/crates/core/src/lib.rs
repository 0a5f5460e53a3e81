//! Random-feature mapping with sparse random projection, and the planning
//! front-end and back-end that consume the resulting fields.

pub mod backend;
pub mod checkpoint;
pub mod completion;
pub mod embedding;
pub mod error;
pub mod features;
pub mod field;
pub mod frontend;
pub mod geometry;
pub mod linear;
pub mod projection;

pub use error::{Error, Result};
pub use features::{Activation, RandomFeatureMap};
pub use field::{FieldConfig, FieldKind, ParametricField, TrainingSet};
pub use linear::{AdamWConfig, AdamWState, LinearHead, RidgeConfig, Task};
pub use projection::{FeatureProjection, SparseProjection};
