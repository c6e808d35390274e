use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("unsupported order {order} (maximum is {max})")]
    UnsupportedOrder { order: u32, max: u32 },

    #[error("source and target points coincide (separation {0:e})")]
    Coincident(f64),

    #[error("second derivatives are not available for this field")]
    DerivativeUnavailable,

    #[error("invalid medium: {0}")]
    InvalidMedium(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("mode {mode} is near-singular (condition number {cond:e}); the radius is close to an interior Dirichlet eigenvalue")]
    NearSingularMode { mode: i64, cond: f64 },

    #[error("far-field operator is not normal enough for an eigensystem (defect {defect:e})")]
    NormalityViolation { defect: f64 },

    #[error("eigensystem check failed: {0}")]
    EigenCheck(String),

    #[error("truncation removed every mode")]
    EmptyRetention,

    #[error("forward solve failed for incident direction {index}: {source}")]
    ForwardFailure {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
