use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("normal equations are singular; use a regularization alpha > 0")]
    SingularSystem,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training labels contain a single class; the decision boundary is undefined")]
    SingleClass,

    #[error("field kind mismatch: expected {expected}, got {actual}")]
    KindMismatch { expected: &'static str, actual: &'static str },

    #[error("{which} point is occupied (score {score:.4} > threshold {threshold})")]
    EndpointOccupied {
        which: &'static str,
        score: f64,
        threshold: f64,
    },

    #[error("goal unreachable after visiting {nodes_visited} nodes")]
    Unreachable { nodes_visited: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
