use std::path::PathBuf;

/// Errors surfaced by the CLI, each with a fixed process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hicluster_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 2 usage/parse, 3 resource guard, 4 internal invariant breach.
    pub fn exit_code(&self) -> u8 {
        use hicluster_core::Error as E;
        match self {
            CliError::Core(E::ResourceGuard { .. } | E::TableRange { .. }) => 3,
            CliError::Core(E::Internal(_)) => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
