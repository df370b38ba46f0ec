use std::path::PathBuf;

use serde::Serialize;

/// Failure of a command, split into input validation (exit 2) and runtime (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Input { message: String, path: Option<PathBuf>, line: Option<u64> },
    #[error("{0}")]
    Runtime(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), path: None, line: None }
    }

    pub fn at_line(path: &std::path::Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), path: Some(path.to_path_buf()), line: Some(line) }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn report(&self) -> ErrorReport {
        let (kind, path, line) = match self {
            CliError::Input { path, line, .. } => ("input", path.as_ref().map(|p| p.display().to_string()), *line),
            CliError::Runtime(_) => ("runtime", None, None),
        };
        ErrorReport { status: "error", kind, exit_code: self.exit_code(), message: self.to_string(), path, line }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
}

impl From<marketflux::Error> for CliError {
    fn from(e: marketflux::Error) -> Self {
        use marketflux::Error as E;
        match e {
            E::Parameter(_) | E::Domain(_) | E::Config(_) => CliError::input(e.to_string()),
            E::Estimation(_) | E::Degenerate(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
