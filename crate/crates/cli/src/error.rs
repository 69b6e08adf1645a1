//! Failure classes of a run and their exit codes.

use std::fmt;

use paracavity::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Invalid flags or configuration file (exit 2).
    Config,
    /// An iteration or quadrature did not converge (exit 3).
    Numerical,
    /// Inputs outside the domain of a computation (exit 4).
    Domain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Config,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Numerical,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Domain,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 2,
            FailureKind::Numerical => 3,
            FailureKind::Domain => 4,
        }
    }

    /// Wraps a library error with a description of what was being computed.
    pub fn from_core(context: &str, e: Error) -> Self {
        let message = format!("{context}: {e}");
        let kind = match e {
            Error::InvalidCavity { .. } | Error::InvalidSpec { .. } => FailureKind::Config,
            Error::NonConvergence { .. }
            | Error::ClosureFailure(_)
            | Error::QuadratureNotConverged(_)
            | Error::AbortOnDrift { .. }
            | Error::NotBracketed { .. } => FailureKind::Numerical,
            _ => FailureKind::Domain,
        };
        Self { kind, message }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        // an unwritable output directory is a configuration problem
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `?`-friendly context for library results.
pub(crate) trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for paracavity::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|e| CliError::from_core(what, e))
    }
}
