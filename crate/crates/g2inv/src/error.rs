use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jet order {0} out of range (max 3)")]
    OrderOutOfRange(usize),
    #[error("jet orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("in {path}: {source}")]
    InExpr {
        path: String,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid expression: {0}")]
    Validation(String),
    #[error("missing component {0}")]
    MissingComponent(String),
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("malformed document: {0}")]
    Json(String),
    #[error("unknown catalog metric '{0}'")]
    UnknownCatalog(String),
    #[error("missing parameter '{0}'")]
    MissingParam(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("frame required: {0}")]
    FrameRequired(String),
    #[error("dependent invariant pair: |Δ| = {0:e}")]
    DependentPair(f64),
    #[error("insufficient coverage: {retained} samples retained, {required} required")]
    InsufficientCoverage { retained: usize, required: usize },
    #[error("pole: {0}")]
    Pole(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn in_expr(self, path: impl Into<String>) -> Error {
        Error::InExpr { path: path.into(), source: Box::new(self) }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
