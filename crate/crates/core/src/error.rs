use thiserror::Error;

/// Errors raised by the FeAR library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FearError {
    #[error("empty point set")]
    EmptyPointSet,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} outside the window [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("joint action has {actual} entries but the scenario has {expected} agents")]
    JointActionLength { expected: usize, actual: usize },

    #[error("agent index {index} out of range for {count} agents")]
    AgentIndex { index: usize, count: usize },

    #[error("agent {agent}: action magnitude {magnitude} exceeds a_max {a_max}")]
    ActionOutOfBounds {
        agent: usize,
        magnitude: f64,
        a_max: f64,
    },

    #[error("context was resolved with ghost {found:?} but agent {expected} was queried")]
    ContextMismatch {
        expected: usize,
        found: Option<usize>,
    },

    #[error("fear_pair requires distinct actor and affected agents (got {0})")]
    SameAgent(usize),

    #[error("clip of NaN")]
    NotANumber,

    #[error("no collision-free candidate")]
    NoCollisionFreeCandidate {
        /// Best candidate by the policy scalar, ignoring the collision mask.
        best: Box<crate::planner::CandidateEvaluation>,
    },

    #[error("empty candidate list")]
    NoCandidates,
}

pub type Result<T, E = FearError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> FearError {
    FearError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
