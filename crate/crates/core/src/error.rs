use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IflError {
    #[error("element is not a unit: {0}")]
    NonUnit(String),
    #[error("argument outside the domain: {0}")]
    BadDomain(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{what}: search space {size} exceeds the cap {cap} (raise --cap or IFL_CAP)")]
    TooLarge { what: String, size: u128, cap: u128 },
    #[error("{what}: enumeration exceeded --cap {cap} after {count} elements")]
    CapExceeded { what: String, count: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("not a p-group: {0}")]
    NotPGroup(String),
    #[error("lattice is not stable under Ad(j)")]
    NotStable,
    #[error("bad j: {0}")]
    BadJ(String),
    #[error("degenerate result at stage {stage}: {detail}")]
    Degenerate { stage: String, detail: String },
    #[error("unverified at stage {stage}: {detail}")]
    Unverified { stage: String, detail: String },
    #[error("not an eigenform: {0}")]
    NotEigen(String),
    #[error("truncation too short: {0}")]
    TruncationTooShort(String),
    #[error("bad level: {0}")]
    BadLevel(String),
    #[error("level too shallow: {0}")]
    LevelTooShallow(String),
    #[error("incompatible characters: {0}")]
    IncompatibleCharacters(String),
    #[error("eta product weight offset is not a positive integer: {0}")]
    NonIntegralWeightOffset(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("residual cocycle does not split")]
    ResidualObstruction,
    #[error("not semisimple: {0}")]
    NotSemisimple(String),
    #[error("not regular: {0}")]
    NotRegular(String),
    #[error("matrix is not upper triangular")]
    NotTriangular,
    #[error("io: {0}")]
    Io(String),
}

impl IflError {
    /// Pipeline stage attached to the error, if any.
    pub fn stage(&self) -> Option<&str> {
        match self {
            IflError::Degenerate { stage, .. } | IflError::Unverified { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, IflError>;

pub(crate) fn too_large(what: &str, size: u128, cap: u128) -> IflError {
    IflError::TooLarge {
        what: what.to_string(),
        size,
        cap,
    }
}
