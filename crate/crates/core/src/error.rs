use thiserror::Error;

/// Errors raised while reading a requirements file.
///
/// Line numbers are 1-based and refer to physical lines of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unknown label abbreviation `{token}`")]
    UnknownAbbrev { line: usize, token: String },
    #[error("line {line}: duplicate literal in clause")]
    DuplicateLiteral { line: usize },
    #[error("line {line}: clause contains a label and its negation")]
    TautologicalClause { line: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::UnknownAbbrev { line, .. }
            | ParseError::DuplicateLiteral { line }
            | ParseError::TautologicalClause { line }
            | ParseError::EmptyClause { line }
            | ParseError::Syntax { line, .. } => *line,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid label table: {0}")]
    LabelTable(String),
    #[error("invalid clause: {0}")]
    InvalidClause(String),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("score {value} at position {index} outside [0, 1]")]
    InvalidScore { index: usize, value: f64 },
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("weight for label {index} is not positive ({value})")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("policy {0} requires per-label average precision values")]
    MissingAveragePrecision(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Input { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
