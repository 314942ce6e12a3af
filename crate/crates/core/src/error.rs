use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate id {id:?} on lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported language {0:?}")]
    UnsupportedLanguage(String),

    #[error("source and target language are both {0}")]
    SameLanguage(crate::LanguageId),

    #[error("toolchain `{tool}` is not available: {message}")]
    Toolchain { tool: String, message: String },

    #[error("no gold report for program {0:?}")]
    MissingGoldReport(String),

    #[error("checkpoint config hash {found} does not match current config {expected}")]
    ConfigMismatch { expected: String, found: String },

    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
