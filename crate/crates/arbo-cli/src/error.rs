//! Command errors and their exit codes.

use arbo::ArboError;
use thiserror::Error;

/// Failure of a command.
#[derive(Debug, Error)]
pub enum CliError {
    /// A file could not be read or written.
    #[error("cannot access {path}: {source}")]
    Io {
        /// Offending path.
        path: String,
        /// Underlying error.
        source: std::io::Error,
    },

    /// The configuration is not valid JSON or has wrong or missing fields.
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        /// Configuration origin.
        path: String,
        /// Line of the error.
        line: usize,
        /// Column of the error.
        column: usize,
        /// Parser message naming the field.
        message: String,
    },

    /// The configuration parses but holds inadmissible values.
    #[error("invalid configuration: {0}")]
    Invalid(String),

    /// A numerical analysis failed.
    #[error(transparent)]
    Numeric(#[from] ArboError),

    /// A CSV record could not be written.
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    /// A JSON report could not be serialised.
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    /// At least one forward-backward sweep hit its iteration cap.
    #[error("sweep did not converge for {0}")]
    NonConvergence(String),
}

impl CliError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Invalid(_) => 2,
            Self::Numeric(_) => 3,
            Self::NonConvergence(_) => 4,
            Self::Io { .. } | Self::Csv(_) | Self::Json(_) => 1,
        }
    }
}
