use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("point {0:?} lies outside the grid domain")]
    OutOfDomain([f64; 3]),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("series does not terminate and |z| >= 1 (z = {0})")]
    NonTerminating(f64),
    #[error("series failed to converge within {0} terms")]
    NoConvergence(usize),
    #[error("gamma function pole at {0}")]
    Pole(f64),
    #[error("negative boundary trace {value} at plane node {node}")]
    NegativeTrace { node: usize, value: f64 },
    #[error("height function vanishes (H = {0:e}); frequency undefined")]
    DegenerateHeight(f64),
    #[error("point {0:?} is not a free-boundary node")]
    NotFreeBoundary([f64; 3]),
    #[error("malformed field dump: {0}")]
    Dump(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
