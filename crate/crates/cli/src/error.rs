use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a run that completed.
pub const EXIT_OK: u8 = 0;
/// Exit status for I/O and other unexpected failures.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status for a configuration that does not validate.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for a violated numerical contract.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// `field` is the dotted path of the offending config entry.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: gamow_lab::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps a library error. Precondition failures are attributed to
    /// `field`; everything else is a numerical-contract violation.
    pub fn library(field: &str, err: gamow_lab::Error) -> Self {
        use gamow_lab::Error as E;
        match err {
            E::InvalidArgument(_)
            | E::IncompatibleGrids
            | E::NeedsFullLine
            | E::ClassRequired
            | E::RoleMismatch(_)
            | E::OutsideSemigroup(_)
            | E::PoleNotInLowerHalfPlane(_)
            | E::InsufficientGrid(_)
            | E::Parse(_) => CliError::validation(field, err.to_string()),
            E::Io(source) => CliError::Io {
                path: PathBuf::from(field),
                source,
            },
            other => CliError::Numerical {
                context: field.to_string(),
                source: other,
            },
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}
