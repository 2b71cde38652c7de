use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |H - H^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid process matrix: {0}")]
    InvalidProcess(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("map is not trace preserving (output trace deviates by {0:.3e})")]
    TraceNotPreserved(f64),

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("SDP solver failure: {0}")]
    Solver(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
