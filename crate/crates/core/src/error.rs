use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid local dimensions {da}x{db}: both factors must be at least 2")]
    InvalidDims { da: usize, db: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// A physical constraint failed; `tolerance` names the violated tolerance
    /// (e.g. `tol_trace`) and `index` the offending state when known.
    #[error("state {}: {violation} (violates {tolerance} = {limit:e})", index.map_or_else(|| "-".to_string(), |i| i.to_string()))]
    Physics {
        index: Option<usize>,
        violation: String,
        tolerance: &'static str,
        limit: f64,
    },

    #[error("zero vector cannot be normalized")]
    ZeroVector,

    #[error("subspace has dimension zero")]
    EmptySubspace,

    #[error("states {0} and {1} are not orthogonal (overlap {2:e})")]
    NotOrthogonal(usize, usize, f64),

    #[error("ensemble needs at least two states, got {0}")]
    TooFewStates(usize),

    #[error("invalid subsystem tag {0:?}")]
    InvalidSubsystem(String),

    #[error("unknown catalog ensemble {0:?}")]
    UnknownCatalog(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("schema error at {location}: {reason}")]
    Schema { location: String, reason: String },

    #[error("candidate {index} does not share the support of state {index}: {reason}")]
    CandidateSupport { index: usize, reason: String },

    /// The bisection never verified feasibility of its upper end; `lo`/`hi`
    /// is the last bracket.
    #[error("{what} did not converge; last bracket [{lo}, {hi}]")]
    NonConvergence { what: &'static str, lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn physics(
        index: Option<usize>,
        violation: impl Into<String>,
        tolerance: &'static str,
        limit: f64,
    ) -> Self {
        Error::Physics {
            index,
            violation: violation.into(),
            tolerance,
            limit,
        }
    }

    /// True for solver convergence failures (as opposed to input errors).
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
