use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    /// Malformed JSON or a value of the wrong type.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("state {state} action {action}: {message}")]
    Literal {
        state: usize,
        action: String,
        message: String,
    },

    /// The file parsed but violates the game invariants.
    #[error("invalid model: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl From<serde_json::Error> for ModelError {
    fn from(err: serde_json::Error) -> Self {
        ModelError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("game too large for oracle: {profiles} strategy profiles exceed the limit of {limit}")]
    TooLarge { profiles: u128, limit: u128 },

    #[error("max-min and min-max disagree at state {state}")]
    ExchangeViolation { state: usize },
}
