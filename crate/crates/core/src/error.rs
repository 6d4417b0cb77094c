use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain ({detail})")]
    Domain { point: Vec<f64>, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("radial exponents {0} and {1} have different parity")]
    Parity(i32, i32),

    #[error("degenerate null vector: inputs {dependent:?} are ring-dependent on the rest")]
    Degenerate { dependent: Vec<usize> },

    #[error("eigenvalue branch collision near node {node} ({detail})")]
    BranchCollision { node: usize, detail: String },

    #[error("eigenspace dimension changed at {point:?}: expected {expected}, found {found}")]
    EigenspaceChange {
        point: Vec<f64>,
        expected: usize,
        found: usize,
    },

    #[error("normal form translation failed: {0}")]
    NormalForm(String),

    #[error("no probe produced a nonzero slice witness")]
    ProbesExhausted,

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn domain(point: &[f64], detail: impl Into<String>) -> Self {
        Error::Domain {
            point: point.to_vec(),
            detail: detail.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error after unwrapping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
