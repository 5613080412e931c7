use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{column}` has type {actual}, expected {expected}")]
    ColumnType {
        column: String,
        expected: String,
        actual: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("unknown {kind} `{value}`")]
    UnknownValue { kind: &'static str, value: String },

    #[error("metric `{metric}` is not applicable: {reason}")]
    NotApplicable { metric: String, reason: String },

    #[error("prerequisite not met for `{metric}`: {reason}")]
    Prerequisite { metric: String, reason: String },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("invalid answer `{answer}` for question `{question}` (valid: {})", .valid.join(", "))]
    InvalidAnswer {
        question: String,
        answer: String,
        valid: Vec<String>,
    },

    #[error("unanswered question `{question}` in tree `{tree}`: {text}")]
    Unanswered {
        tree: String,
        question: String,
        text: String,
    },

    #[error("malformed decision tree `{tree}`: {reason}")]
    MalformedTree { tree: String, reason: String },

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
