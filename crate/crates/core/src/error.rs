use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("non-finite entry (NaN or infinity)")]
    NonFinite,

    #[error("{what} is not normalized (value {value})")]
    NotNormalized { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported dimensions: {0}")]
    Unsupported(String),

    #[error("operation annihilates the state (probability {probability:e})")]
    Annihilated { probability: f64 },

    #[error("Kraus operators increase the trace (max eigenvalue of sum K^dagger K = {max_eigenvalue})")]
    NotContractive { max_eigenvalue: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    /// True for errors caused by unreadable or non-conforming input files,
    /// as opposed to well-formed input that violates a domain constraint.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Format(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}
