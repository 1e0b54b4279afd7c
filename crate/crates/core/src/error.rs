use thiserror::Error;

/// Errors raised by the simulator and the kinematics helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("label `{0}` appears more than once in the register")]
    LabelCollision(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("register mismatch: {0}")]
    LabelMismatch(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate request: {0}")]
    Degenerate(String),

    #[error(
        "resource is not maximally entangled (marginal trace distance to I/2 is {distance:e})"
    )]
    NotMaximallyEntangled { distance: f64 },

    #[error("operation `{channel}` acts on receiver subsystem `{label}`")]
    LocalityViolation { channel: String, label: String },

    /// A computed quantity broke an invariant the physics guarantees. Never
    /// expected; signals a bug in the simulator.
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }

    /// True for failures that indicate a bug rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::InvariantViolation(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
