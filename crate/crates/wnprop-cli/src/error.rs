//! Failure classes and their exit codes.

use thiserror::Error;

/// Exit code on success.
pub const EXIT_OK: u8 = 0;
/// Exit code when a verification check fails.
pub const EXIT_VERIFY: u8 = 1;
/// Exit code for invalid configs.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code for engine tolerance failures.
pub const EXIT_TOLERANCE: u8 = 3;
/// Exit code for domain violations.
pub const EXIT_DOMAIN: u8 = 4;

/// CLI error.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unparseable or inconsistent config.
    #[error("invalid config: {0}")]
    Config(String),
    /// Engine failure.
    #[error(transparent)]
    Engine(#[from] wnprop::Error),
    /// Output could not be written.
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Engine(wnprop::Error::Invalid(_)) => EXIT_CONFIG,
            CliError::Engine(wnprop::Error::Tolerance(_)) => EXIT_TOLERANCE,
            CliError::Engine(wnprop::Error::Domain(_)) => EXIT_DOMAIN,
        }
    }
}
