use thiserror::Error;

pub type Result<T, E = AgoraError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AgoraError {
    #[error("unknown id: {0}")]
    UnknownId(String),
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("conflicting duplicate vote for ({participant}, {statement})")]
    DuplicateVote { participant: String, statement: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad specification: {0}")]
    BadSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("too few rows: need at least 2 participants, got {0}")]
    TooFewRows(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("group {0} has an empty complement")]
    EmptyComplement(usize),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("participant {0} lacks the grouping attribute")]
    MissingAttribute(String),
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),
    #[error("candidate pool exhausted: need {needed}, have {available}")]
    PoolExhausted { needed: usize, available: usize },
    #[error("port failure: {0}")]
    PortFailure(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
}

impl AgoraError {
    /// Stable machine-readable error name.
    pub fn name(&self) -> &'static str {
        match self {
            AgoraError::UnknownId(_) => "UnknownId",
            AgoraError::DuplicateId(_) => "DuplicateId",
            AgoraError::DuplicateVote { .. } => "DuplicateVote",
            AgoraError::SchemaViolation(_) => "SchemaViolation",
            AgoraError::Parse { .. } => "ParseError",
            AgoraError::Io(_) => "IoError",
            AgoraError::BadSpec(_) => "BadSpec",
            AgoraError::InvalidArgument(_) => "InvalidArgument",
            AgoraError::TooFewRows(_) => "TooFewRows",
            AgoraError::DegenerateInput(_) => "DegenerateInput",
            AgoraError::EmptyComplement(_) => "EmptyComplement",
            AgoraError::NonFinite(_) => "NonFinite",
            AgoraError::IndexOutOfRange(_) => "IndexOutOfRange",
            AgoraError::MissingAttribute(_) => "MissingAttribute",
            AgoraError::EmptyGroup(_) => "EmptyGroup",
            AgoraError::InvalidRanking(_) => "InvalidRanking",
            AgoraError::PoolExhausted { .. } => "PoolExhausted",
            AgoraError::PortFailure(_) => "PortFailure",
            AgoraError::EmptyInput(_) => "EmptyInput",
        }
    }
}
