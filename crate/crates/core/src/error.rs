use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate operator: {0}")]
    DegenerateOperator(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("fundamental-domain reduction did not converge after {iterations} steps (last point {re}+{im}i)")]
    ReductionFailure { iterations: usize, re: f64, im: f64 },

    #[error("numeric failure: {message} (residual {residual:e})")]
    NumericFailure { message: String, residual: f64 },

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
