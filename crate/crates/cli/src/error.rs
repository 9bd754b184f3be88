use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Numerical(#[from] caustica::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("self-test failed: {0}")]
    SelftestFailed(String),
}

impl CliError {
    /// Process exit status: 1 for usage and file errors, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) | CliError::SelftestFailed(_) => 2,
        }
    }
}
