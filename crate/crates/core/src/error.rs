//! Error type shared by all simulation modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value is outside its allowed domain.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An index or level count exceeds what the inputs provide.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An iterative numerical procedure failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The expansion basis cannot represent the requested states faithfully.
    #[error("basis inadequate: {0}")]
    BasisInadequacy(String),

    /// A dipole matrix element required for calibration is numerically zero.
    #[error("degenerate dipole element: {0}")]
    DegenerateDipole(String),

    /// A level label could not be resolved.
    #[error("unknown level label: {0}")]
    UnknownLevel(String),

    /// Accumulated integration error exceeded tolerance.
    #[error("step size too large: {0}")]
    StepSize(String),

    /// A state object violates its structural invariants.
    #[error("state corruption: {0}")]
    StateCorruption(String),

    /// Series lengths passed together do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
