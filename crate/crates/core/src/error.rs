use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown field `{0}`")]
    UnknownField(String),

    #[error("field `{field}`: missing parameter `{param}`")]
    MissingParameter { field: String, param: String },

    #[error("field `{field}`: invalid parameter `{param}`: {reason}")]
    InvalidParameter {
        field: String,
        param: String,
        reason: String,
    },

    #[error("field `{field}` does not support {capability}")]
    MissingCapability { field: String, capability: &'static str },

    #[error("field `{field}` returned a non-finite value at {at:?}")]
    NonFinite { field: String, at: Vec<f64> },

    #[error("degenerate gradient (norm {norm:e})")]
    DegenerateGradient { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("{0}")]
    EmptyInput(&'static str),

    #[error("unknown polyhedron `{0}`")]
    UnknownPolyhedron(String),

    #[error("invalid direction set: {0}")]
    InvalidSet(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
