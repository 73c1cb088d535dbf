use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid field `{field}`: {msg}")]
    Validation { field: String, msg: String },
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("velocity field is undefined at the singular time t = 1")]
    SingularTime,
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        LabError::Validation { field: field.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
