use std::fmt;
use std::process::ExitCode;

/// A command failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

/// Bad flags, unreadable or malformed config and input files.
pub const EXIT_CONFIG: u8 = 2;
/// The run finished but some tasks or records failed.
pub const EXIT_PARTIAL: u8 = 3;
/// Writing outputs failed.
pub const EXIT_IO: u8 = 1;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
