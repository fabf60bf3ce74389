use num_complex::Complex64;
use thiserror::Error;

use crate::grid::HardyClass;
use crate::resonance::FitReport;

/// Errors raised by the library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("wave functions live on different energy grids")]
    IncompatibleGrids,

    #[error("operation needs a full-line energy grid")]
    NeedsFullLine,

    #[error("leakage is undefined for the zero function")]
    UndefinedLeakage,

    #[error("expected a {expected} function, leakage against that class is {leakage:.3e}")]
    ClassMismatch { expected: HardyClass, leakage: f64 },

    #[error("wave function role mismatch: {0}")]
    RoleMismatch(String),

    #[error("|Im z| = {distance:.3e} is closer to the real axis than the limit {limit:.3e}")]
    TooCloseToAxis { distance: f64, limit: f64 },

    #[error("line-shape fit did not converge after {} iterations", report.iterations)]
    FitFailed { report: Box<FitReport> },

    #[error("pole {0} is not in the lower half-plane")]
    PoleNotInLowerHalfPlane(Complex64),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("t = {0} is outside the semigroup domain t >= 0")]
    OutsideSemigroup(f64),

    #[error("test function has vanishing overlap with the state")]
    DegenerateTest,

    #[error(
        "pole term + background disagrees with the direct integral (relative defect {defect:.3e})"
    )]
    DecompositionInconsistent {
        direct: Complex64,
        pole_term: Complex64,
        background: Complex64,
        defect: f64,
    },

    #[error("a declared Hardy class is required")]
    ClassRequired,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
