use std::path::PathBuf;

use stealth_core::ErrorKind;

/// Process exit codes of the `stealth` tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const HYPOTHESIS: i32 = 2;
    pub const ALGORITHM: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] stealth_core::Error),
    #[error("trigger search failed: {0}")]
    Infeasible(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl ToolError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Io { .. } | Self::Parse { .. } => exit::USAGE,
            Self::Core(e) => match e.kind() {
                ErrorKind::Input => exit::USAGE,
                ErrorKind::Hypothesis => exit::HYPOTHESIS,
                ErrorKind::Algorithm => exit::ALGORITHM,
            },
            Self::Infeasible(_) => exit::ALGORITHM,
            Self::Verification(_) => exit::VERIFICATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
