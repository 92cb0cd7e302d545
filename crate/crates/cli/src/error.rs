use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Capability(String),

    #[error(transparent)]
    Core(#[from] trotterr::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use trotterr::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Core(e) => match e {
                E::Argument(_) | E::Dimension { .. } | E::Parse { .. } => 2,
                E::Capability(_) | E::SearchOverflow { .. } => 3,
                E::Convergence { .. } | E::Validation(_) => 4,
                E::Json(_) => 1,
            },
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
