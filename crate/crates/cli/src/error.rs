use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}: "),
            Origin::Flag => f.write_str("command line: "),
            Origin::Default => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{origin}`{key}` expects {expected}, got `{value}`")]
    Type {
        origin: Origin,
        key: String,
        expected: String,
        value: String,
    },
    #[error("{origin}unknown key `{key}`{}", command.map(|c| format!(" for command `{c}`")).unwrap_or_default())]
    UnknownKey {
        origin: Origin,
        key: String,
        command: Option<&'static str>,
    },
    #[error("missing `command`")]
    MissingCommand,
    #[error("`{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] repulsive_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// 2 for configuration and validation errors, 3 for errors raised by the
    /// numerical modules, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }
}
