use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grids do not match")]
    GridMismatch,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field has background {background}, operation requires {required}")]
    Background { background: f64, required: f64 },
    #[error("field contains infinite values")]
    InfiniteValue,
    #[error("invalid value {value} at cell {cell}: {reason}")]
    InvalidValue { cell: usize, value: f64, reason: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("kernel is not a probability density (integral {0})")]
    NotNormalized(f64),
    #[error("instance too large for brute force: {0}")]
    InstanceTooLarge(String),
    #[error("jump density is not truncatable: {0}")]
    InfiniteJumpRate(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("time grid: {0}")]
    TimeGrid(String),
    #[error("horizon too short: {0}")]
    Horizon(String),
    #[error("capacity ladder not monotone: {0}")]
    NonMonotoneLadder(String),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
