use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("line {line}, field `{field}`: {msg}")]
    Parse { line: usize, field: String, msg: String },
    #[error(transparent)]
    Numeric(#[from] liewedge::Error),
}

impl CliError {
    /// 1 numerical failure, 2 usage or parse error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Numeric(liewedge::Error::InvalidArgument(_)) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}
