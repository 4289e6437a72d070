use std::path::PathBuf;

/// Errors produced by the estimation, testing and simulation routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("x and y have different lengths ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },

    #[error("non-finite value in column {column} at row {row}")]
    NonFiniteValue { column: char, row: usize },

    #[error("tied values in column {column} (value {value}); the continuity assumption is violated, try --tie-policy=random-break")]
    TiesPresent { column: char, value: f64 },

    #[error("sample too small: n = {n}, need at least {min}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("sample too large: n = {n}, at most {max} supported")]
    SampleTooLarge { n: usize, max: usize },

    #[error("smoothing radius {s} too large for n = {n} (need 2s+1 <= n+1)")]
    SmoothingRadiusTooLarge { s: usize, n: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("no grid point lies in the {0} region")]
    DegenerateRegion(&'static str),

    #[error("null pool is empty")]
    EmptyPool,

    #[error("null pool mismatch: {0}")]
    MismatchedPool(String),

    #[error("invalid pool size {0} (need at least {min})", min = crate::calibration::MIN_POOL_SIZE)]
    InvalidPoolSize(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
