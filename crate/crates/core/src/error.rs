use thiserror::Error;

/// Errors raised by the matrix, mean, and transform routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),

    #[error("invalid mean weight {0}: must lie in [0, 1]")]
    InvalidWeight(f64),

    #[error("invalid power-mean exponent {0}: must lie in [-1, 1]")]
    InvalidExponent(f64),

    #[error("invalid representing measure: {0}")]
    InvalidMeasure(String),

    #[error("perspective of the dominating mean vanishes at ({0}, {1})")]
    ZeroDenominator(f64, f64),

    #[error(
        "input must be invertible (smallest singular value {min_sv:.3e}, largest {max_sv:.3e})"
    )]
    SingularInput { min_sv: f64, max_sv: f64 },

    #[error("mean `{0}` has no representing measure")]
    MeasureMissing(String),

    #[error("kernel condition null(T*) ⊆ null(T) violated (residual {0:.3e})")]
    KernelConditionViolated(f64),

    #[error("weight sequence too short: need {needed}, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("switch-point search exceeded {0} steps")]
    SearchBudgetExceeded(usize),

    #[error("angle grids do not match")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
