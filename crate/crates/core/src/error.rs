use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the geometry, estimation and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The function has several active pieces at the point, so no gradient
    /// (or Hessian) is defined there.
    #[error("function is not differentiable at {point:?}")]
    NonDifferentiable { point: Vec<f64> },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// The smoothing map collapses to a point at its own center.
    #[error("smoothing map is degenerate at its center")]
    DegenerateMap,

    #[error("operation not supported by this objective: {0}")]
    Unsupported(&'static str),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
