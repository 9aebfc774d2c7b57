//! CLI error taxonomy and the exit codes scripts rely on:
//! 0 success, 2 configuration, 3 numerical tolerance, 4 I/O.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<doublewell::Error> for CliError {
    fn from(e: doublewell::Error) -> Self {
        use doublewell::Error as E;
        match e {
            E::InvalidConfig(_) | E::OutOfRange(_) | E::UnknownLevel(_) | E::ShapeMismatch(_) => {
                CliError::Config(e.to_string())
            }
            E::NumericalFailure(_)
            | E::BasisInadequacy(_)
            | E::DegenerateDipole(_)
            | E::StepSize(_)
            | E::StateCorruption(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
