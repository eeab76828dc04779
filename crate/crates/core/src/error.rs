use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inconsistent data: {0}")]
    InconsistentData(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("inadmissible deformation: {0}")]
    Admissibility(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported field file version {0} (reader supports version 1)")]
    UnsupportedVersion(u32),

    #[error("infeasible at V = {volume}: {constraint}")]
    Infeasible { volume: f64, constraint: String },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported render: {0}")]
    UnsupportedRender(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
