use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate reference point: coordinate {index} is {value:e}, below the floor")]
    DegenerateReference { index: usize, value: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{what} did not converge (residual {residual:e})")]
    SolverFailure { what: &'static str, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("tape was recorded against a different parameter state")]
    StaleTape,

    #[error("conflict ratio undefined: boundary gradient has zero norm")]
    UndefinedRatio,

    #[error("trace is missing column `{0}`")]
    MissingColumn(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the numbers themselves rather than by bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::SolverFailure { .. } | Error::DegenerateReference { .. }
        )
    }
}
