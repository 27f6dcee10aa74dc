use thiserror::Error;

/// Failures of a command, each mapped to a fixed process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("horizon too short: {0}")]
    TooShort(String),
    #[error("integration overflow: {0}")]
    Overflow(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Eval(_) | CliError::Io(_) => 3,
            CliError::TooShort(_) => 4,
            CliError::Overflow(_) => 5,
        }
    }
}

impl From<halanay::Error> for CliError {
    fn from(e: halanay::Error) -> Self {
        use halanay::Error as E;
        let msg = e.to_string();
        match e {
            E::Parse(_)
            | E::InvalidPiecewise(_)
            | E::InvalidParameter(_)
            | E::EmptyPairs
            | E::TauMismatch(..)
            | E::Delay { .. } => CliError::Config(msg),
            E::HorizonTooShort { .. } => CliError::TooShort(msg),
            E::Overflow { .. } => CliError::Overflow(msg),
            E::Eval(_)
            | E::EmptyInterval { .. }
            | E::BoundViolation { .. }
            | E::NotCertified
            | E::GridMismatch
            | E::InsufficientSamples { .. } => CliError::Eval(msg),
        }
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Eval(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
