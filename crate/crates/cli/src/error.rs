use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] graphene_friction::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    BadFile { path: String, reason: String },
    #[error("{failed} invariant check(s) failed")]
    ValidationFailed { failed: usize },
}

impl CliError {
    /// 1 usage or file problems, 2 below threshold, 3 numerical failure, 4 failed validation.
    pub fn exit_code(&self) -> u8 {
        use graphene_friction::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::BadFile { .. } => 1,
            CliError::Model(E::InvalidParams(_)) => 1,
            CliError::Model(E::BelowThreshold { .. }) => 2,
            CliError::Model(_) => 3,
            CliError::ValidationFailed { .. } => 4,
        }
    }
}
