use thiserror::Error;

/// Failures of the command-line driver, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid override `{assignment}`: {message}")]
    Override { assignment: String, message: String },

    #[error(transparent)]
    Core(#[from] abf_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("acceptance check failed: {0}")]
    Check(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 4 for failed
    /// acceptance checks, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::UnknownPreset(_) | CliError::Override { .. } => 2,
            CliError::Core(abf_core::Error::Config(_) | abf_core::Error::Usage(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 1,
            CliError::Check(_) => 4,
        }
    }
}

pub(crate) fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
