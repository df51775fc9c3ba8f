use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at `{path}`: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("no JSON object found in model output")]
    NoJsonFound,
    /// The model never produced any output (transport failure, timeout).
    #[error("no response: {0}")]
    NoResponse(String),
}

impl ParseError {
    pub(crate) fn violation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ParseError::SchemaViolation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
