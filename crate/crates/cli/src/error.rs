use std::fmt;

use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable or malformed input.
    Parse,
    /// Well-formed input that violates a constraint.
    Validation,
    /// The numerics blew up or lost positivity.
    Divergence,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Divergence => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::Divergence => "divergence",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Parse,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.kind.exit_code()
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind.as_str(),
            "message": self.message,
            "exit_code": self.exit_code(),
        })
        .to_string()
    }

    /// Prefixes the message with where the error came from.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<decoherence::Error> for CliError {
    fn from(e: decoherence::Error) -> Self {
        use decoherence::Error as E;
        let kind = match e {
            E::Parse { .. } => ErrorKind::Parse,
            E::Integration { .. } | E::Divergence { .. } | E::NoConvergence { .. } => {
                ErrorKind::Divergence
            }
            _ => ErrorKind::Validation,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
