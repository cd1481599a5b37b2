use spr_lab::SprError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn violation(message: impl Into<String>) -> Self {
        Self { code: EXIT_VIOLATION, message: message.into() }
    }
}

impl From<SprError> for CliError {
    fn from(e: SprError) -> Self {
        let code = match e {
            SprError::DegenerateBasis(_) => EXIT_DEGENERATE,
            SprError::InvalidArgument(_)
            | SprError::ResourceLimit(_)
            | SprError::Parse(_)
            | SprError::Json(_)
            | SprError::Io(_)
            | SprError::NotFound(_) => EXIT_CONFIG,
            SprError::InsufficientSpread(_) => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}
