use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),

    #[error("order relation is not antisymmetric: {0} <= {1} <= {0}")]
    NotAntisymmetric(String, String),

    #[error("poset has {0} points, more than the supported {1}")]
    TooManyPoints(usize, usize),

    #[error("not an open (up-set): {0}")]
    NotOpen(String),

    #[error("{0} is not contained in {1}")]
    NotContained(String, String),

    #[error("map is not monotone: {0} <= {1} but images are not comparable")]
    NotMonotone(String, String),

    #[error("functoriality fails for {0} <= {1}")]
    NotFunctorial(String, String),

    #[error("naturality fails for {0} <= {1}")]
    NotNatural(String, String),

    #[error("map on stalk at {0} does not respect relations")]
    IllDefinedMap(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid category: {0}")]
    InvalidCategory(String),

    #[error("ring mismatch: {0}")]
    RingMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("enumeration refused: {0}")]
    TooLarge(String),

    #[error("d∘d ≠ 0 at degree {0}")]
    NotAComplex(usize),

    #[error("not exact: {0}")]
    NotExact(String),

    #[error("ill-typed formula: {0}")]
    IllTyped(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("integer overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
