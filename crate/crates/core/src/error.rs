use thiserror::Error;

pub type Result<T, E = LccError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LccError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("target matrix has zero Frobenius norm")]
    ZeroMatrix,

    #[error("exponent {exp} outside [{min}, {max}]")]
    ExponentOutOfRange { exp: i32, min: i32, max: i32 },

    #[error("invalid exponent range [{min}, {max}]")]
    InvalidExponentRange { min: i32, max: i32 },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("vertex {vertex} references source {src} which is not an earlier vertex")]
    NonTopological { vertex: usize, src: usize },

    #[error("vertex {0} has no terms")]
    EmptyWiring(usize),

    #[error("cached value of vertex {0} does not match its terms")]
    StaleCache(usize),

    #[error("codeword has zero norm")]
    DegenerateCodeword,

    #[error("search space too large: {combinations} combinations (limit {limit})")]
    SearchSpaceTooLarge { combinations: u128, limit: u128 },

    #[error("output row {0} is unassigned")]
    IncompleteDag(usize),

    #[error("output row {row} out of range (dag has {rows} outputs)")]
    UnknownOutput { row: usize, rows: usize },

    #[error("input length {got} does not match {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl LccError {
    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        LccError::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for LccError {
    fn from(e: std::io::Error) -> Self {
        LccError::Io(e.to_string())
    }
}
