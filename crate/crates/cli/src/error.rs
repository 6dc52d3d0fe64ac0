use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Invalid configuration. `path` is the dotted key at fault; line and column
/// are set when the problem can be pinned to the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub path: String,
    pub msg: String,
}

impl ConfigError {
    pub fn at(line: usize, column: usize, path: &str, msg: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            column: Some(column),
            path: path.to_string(),
            msg: msg.into(),
        }
    }

    pub fn field(path: &str, msg: impl Into<String>) -> Self {
        Self {
            line: None,
            column: None,
            path: path.to_string(),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if !self.path.is_empty() {
            write!(f, " in `{}`", self.path)?;
        }
        write!(f, ": {}", self.msg)
    }
}

impl std::error::Error for ConfigError {}

impl From<matterwave::Error> for ConfigError {
    fn from(e: matterwave::Error) -> Self {
        match e {
            matterwave::Error::Parse { line, column, msg } => {
                ConfigError::at(line, column, "", msg)
            }
            other => ConfigError::field("", other.to_string()),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] matterwave::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for failures
    /// while computing or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 3,
        }
    }
}
