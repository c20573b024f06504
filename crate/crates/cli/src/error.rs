use std::process::ExitCode;

use clustvar_core::Error as CoreError;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// Bad input file, schema, flag value or configuration.
    Input,
    /// The computation itself failed, e.g. a vanished category on a resample.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            failure: Failure::Input,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            failure: Failure::Numerical,
            message: message.into(),
        }
    }

    pub fn io(e: csv::Error) -> Self {
        CliError::input(format!("write failed: {e}"))
    }

    /// Errors raised while validating freshly loaded columns are always input errors.
    pub fn from_data(e: CoreError) -> Self {
        CliError::input(e.to_string())
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> ExitCode {
        match self.failure {
            Failure::Input => ExitCode::from(2),
            Failure::Numerical => ExitCode::from(3),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let failure = match &e {
            CoreError::RareCategory { .. }
            | CoreError::ConstantVector
            | CoreError::ZeroBlock
            | CoreError::DegenerateGain
            | CoreError::MergeStep { .. }
            | CoreError::AllReplicatesFailed { .. } => Failure::Numerical,
            _ => Failure::Input,
        };
        CliError {
            failure,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::input(format!("JSON: {e}"))
    }
}
