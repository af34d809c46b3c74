use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    /// The file parsed but does not follow its schema.
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("run has {got} footsteps, fewer than the {needed} requested")]
    NotEnoughSteps { needed: usize, got: usize },

    #[error("pipeline stopped: {0}")]
    Pipeline(String),

    #[error(transparent)]
    Core(#[from] footsense_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
