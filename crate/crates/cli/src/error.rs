use qnv_core::QnvError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("spec error: {0}")]
    Spec(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("resource budget: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Spec(_) => 3,
            CliError::Verify(_) => 4,
            CliError::Resource(_) => 5,
        }
    }
}

impl From<QnvError> for CliError {
    fn from(e: QnvError) -> Self {
        match e {
            QnvError::Resource { .. } => CliError::Resource(e.to_string()),
            QnvError::InvalidParams(_) => CliError::Parse(e.to_string()),
            _ => CliError::Spec(e.to_string()),
        }
    }
}
