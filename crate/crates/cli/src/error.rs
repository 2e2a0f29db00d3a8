use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: clbath::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub(crate) trait ModelContext<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> ModelContext<T> for clbath::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Model { context: what.to_string(), source })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
