use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: missing inputs, empty grids, ambiguous references.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid `{block}` settings: {source}")]
    Invalid {
        block: &'static str,
        #[source]
        source: lzsweep::Error,
    },

    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] lzsweep::Error),

    /// Outputs were written but an iterative fit stopped early.
    #[error("fit did not converge after {cycles} cycles (results written to {})", out.display())]
    NotConverged { cycles: usize, out: PathBuf },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn invalid(block: &'static str) -> impl FnOnce(lzsweep::Error) -> Self {
        move |source| Self::Invalid { block, source }
    }

    /// Process exit status.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Invalid { .. } | Self::Config { .. } => 2,
            Self::NotConverged { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
