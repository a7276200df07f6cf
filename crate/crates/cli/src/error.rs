use std::fmt;
use std::process::ExitCode;

use adl_sense::Error;

/// Failure of a command together with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const TRAINING: u8 = 4;

impl CliError {
    pub fn usage(message: impl fmt::Display) -> Self {
        Self {
            code: USAGE,
            message: message.to_string(),
        }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self {
            code: DATA,
            message: message.to_string(),
        }
    }

    /// Names the file involved unless the message already does.
    pub fn in_file(mut self, path: &std::path::Path) -> Self {
        let shown = path.display().to_string();
        if !self.message.contains(&shown) {
            self.message = format!("{shown}: {}", self.message);
        }
        self
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

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Divergence { .. } | Error::TrainingFailure { .. } => TRAINING,
            _ => DATA,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::data(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::data(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
