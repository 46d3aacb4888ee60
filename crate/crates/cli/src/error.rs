//! CLI error type, rendered as machine-readable JSON on exit.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.to_string(), message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }
}

impl From<vcnn_core::Error> for CliError {
    fn from(e: vcnn_core::Error) -> Self {
        let kind = match &e {
            vcnn_core::Error::Io(_) => "io",
            vcnn_core::Error::Csv { .. } => "csv",
            vcnn_core::Error::Serde(_) => "serde",
            vcnn_core::Error::Training(_) => "training",
            _ => "core",
        };
        Self::new(kind, e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}
