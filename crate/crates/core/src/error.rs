use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e} > tolerance {tolerance:e})")]
    NonHermitian { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("dimension {0} exceeds the configured bound")]
    DimensionOverflow(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("subset size {s} is invalid for {n} cores")]
    InvalidSubsetSize { n: usize, s: usize },
    #[error("evolution parameter t = {0} is outside [0, 1]")]
    OutOfRangeT(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid channel: {0}")]
    InvalidChannel(&'static str),
    #[error("mutually unbiased basis construction failed: {0}")]
    ConstructionFailure(&'static str),
    #[error("invalid color index {0}")]
    InvalidColorIndex(usize),
    #[error("classical register is required for compensation")]
    MissingRegister,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
