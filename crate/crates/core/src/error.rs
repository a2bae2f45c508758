use thiserror::Error;

/// Errors raised by the model, controller and scenario layers.
///
/// `code()` yields the stable kebab-case identifier used in CLI output and
/// protocol error messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observation set is empty")]
    NoObservations,
    #[error("observation times must be strictly increasing")]
    BadTimes,
    #[error("goal time {goal} is not after the last observation at {last}")]
    GoalInPast { goal: f64, last: f64 },
    #[error("trajectory grid does not match the distribution grid")]
    GridMismatch,
    #[error("invalid kernel parameters: {0}")]
    BadKernel(&'static str),
    #[error("hypothesis set is empty")]
    NoHypotheses,
    #[error("mixture weights are invalid: {0}")]
    BadWeights(&'static str),
    #[error("invalid blend gains ({k_h}, {k_r})")]
    BadGains { k_h: f64, k_r: f64 },
    #[error("staleness time constant must be positive, got {0}")]
    BadTau(f64),
    #[error("invalid parameter {name}: {reason}")]
    OutOfRange { name: String, reason: String },
    #[error("unknown scenario '{id}'; valid ids: {}", valid.join(", "))]
    UnknownScenario { id: String, valid: Vec<String> },
    #[error("unknown controller '{0}'; valid kinds: linear-blend, switching, safeguarded-blend, csc-most-likely, gsc")]
    UnknownController(String),
    #[error("invalid scenario: {0}")]
    BadScenario(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NoObservations => "no-observations",
            Error::BadTimes => "bad-times",
            Error::GoalInPast { .. } => "goal-in-past",
            Error::GridMismatch => "grid-mismatch",
            Error::BadKernel(_) => "bad-kernel",
            Error::NoHypotheses => "no-hypotheses",
            Error::BadWeights(_) => "bad-weights",
            Error::BadGains { .. } => "bad-gains",
            Error::BadTau(_) => "bad-tau",
            Error::OutOfRange { .. } => "out-of-range",
            Error::UnknownScenario { .. } => "unknown-scenario",
            Error::UnknownController(_) => "unknown-controller",
            Error::BadScenario(_) => "bad-scenario",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
