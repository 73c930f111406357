use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: nhdiff_core::Error,
    },
    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Core { source: nhdiff_core::Error::InvalidArgument(_), .. } => 2,
            Self::Core { .. } => 3,
            Self::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}

/// Attaches the coordinates of a failing evaluation to a core error.
pub fn at(context: impl std::fmt::Display) -> impl FnOnce(nhdiff_core::Error) -> CliError {
    let context = context.to_string();
    move |source| CliError::Core { context, source }
}
