use thiserror::Error;

/// Failure of a CLI invocation. User errors exit with 1, internal ones with 2.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, arguments or configuration; the message includes usage.
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: canbench_core::Error,
    },

    /// `--help` or `--version` output; not a failure.
    #[error("{0}")]
    Help(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) | CliError::Run { .. } => 1,
            CliError::Internal(_) => 2,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a human-readable context to core errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for canbench_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Run {
            context: what(),
            source,
        })
    }
}

impl<T> Context<T> for std::io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::Run {
            context: what(),
            source: e.into(),
        })
    }
}
