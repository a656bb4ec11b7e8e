use thiserror::Error;

/// Domain errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("Kraus operators are not trace preserving: residual {residual:.3e}")]
    NotTracePreserving { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design verification failed: {residual} = {value:.3e} exceeds {tol:.3e}")]
    DesignVerification {
        residual: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("design is not a minimal equal-weight design: {0}")]
    NotMinimal(String),

    #[error("no exact design is available for dimension {0}")]
    NoExactDesign(usize),

    #[error(
        "fiducial search did not reach tolerance {tol:.3e} after {restarts} restarts (best residual {best_residual:.3e})"
    )]
    SearchFailed {
        best_residual: f64,
        restarts: usize,
        tol: f64,
    },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    /// Stable machine-readable identifier used in CLI error objects.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSquare { .. } => "not_square",
            Error::NonFinite(_) => "non_finite",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::BadTrace { .. } => "bad_trace",
            Error::NotPositive { .. } => "not_positive",
            Error::NotUnitary { .. } => "not_unitary",
            Error::NotTracePreserving { .. } => "not_trace_preserving",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::DesignVerification { .. } => "design_verification",
            Error::NotMinimal(_) => "not_minimal",
            Error::NoExactDesign(_) => "no_exact_design",
            Error::SearchFailed { .. } => "search_failed",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }

    pub(crate) fn dims(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
