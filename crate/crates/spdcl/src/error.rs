use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    History(String),

    #[error("run directory {dir} is incomplete, missing: {missing}")]
    Incomplete { dir: PathBuf, missing: String },

    #[error(transparent)]
    Core(#[from] spdcl_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Self::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable category printed by the CLI.
    pub fn category(&self) -> &'static str {
        use spdcl_core::Error as C;
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
            Error::Validation(_) => "validation",
            Error::History(_) => "history",
            Error::Incomplete { .. } => "incomplete",
            Error::Core(C::MissingEpoch(_) | C::SampleSetMismatch(_)) => "history",
            Error::Core(
                C::EmptyMatrix { .. }
                | C::ShapeMismatch { .. }
                | C::NonFinite { .. }
                | C::DuplicateSample(_)
                | C::EmptyDump,
            ) => "format",
            Error::Core(_) => "validation",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "io" => 3,
            "format" => 4,
            "validation" => 5,
            "history" => 6,
            "incomplete" => 7,
            _ => 1,
        }
    }
}
