use thiserror::Error;

/// Errors produced by the numerical toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("scale {0} outside the supported range [-64, 64]")]
    ScaleOutOfRange(i32),

    #[error("side length {0} is not a power of two")]
    NonDyadic(f64),

    #[error("grid position does not fit in 64 bits")]
    PositionOverflow,

    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("zero denominator in ratio")]
    ZeroDenominator,

    #[error("stopping constant {c} too small: C^-p + C^-q' = {packing} exceeds 1/4")]
    StoppingConstantTooSmall { c: f64, packing: f64 },

    #[error("stopping-time recursion exceeded depth {0}")]
    DepthExceeded(usize),

    #[error("k = {k} needs more resolution than the limit allows ({reason})")]
    Unresolvable { k: i32, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
