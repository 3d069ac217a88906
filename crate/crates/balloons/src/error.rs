use thiserror::Error;

/// Errors produced by the balloons library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("duplicate points at distance zero (ids {0} and {1})")]
    DuplicatePoints(u32, u32),
    #[error("input size {0} exceeds guard {1}")]
    SizeGuard(usize, usize),
    #[error("parameters are infeasible: {0}")]
    Infeasible(String),
    #[error("point lies outside the built region")]
    OutsideBuiltRegion,
    #[error("numerical routine failed: {0}")]
    Numerical(String),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
