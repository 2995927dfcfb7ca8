use thiserror::Error;

/// Failure of a CLI command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage errors, 3 for data errors, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<rankscreen::Error> for CliError {
    fn from(e: rankscreen::Error) -> Self {
        match e {
            rankscreen::Error::UnknownScenario { .. } | rankscreen::Error::Catalog(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
