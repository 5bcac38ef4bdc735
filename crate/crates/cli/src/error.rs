use std::io;
use std::path::PathBuf;

use serde_json::json;

/// Failure of a CLI operation, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Library(#[from] iontrap_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 usage, 2 physics precondition (or numerical breakdown), 3 I/O.
    pub fn exit_code(&self) -> u8 {
        use iontrap_core::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 3,
            CliError::Library(e) if e.is_physics_precondition() => 2,
            CliError::Library(
                E::EigenResidual { .. } | E::NotHermitian { .. } | E::NotNormalized { .. },
            ) => 2,
            CliError::Library(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "usage",
            2 => "physics",
            _ => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
            }
        })
    }
}
