use thiserror::Error;

/// Everything that can go wrong while building, solving or checking an instance.
///
/// Variants fall into two groups. Input errors (bad files, invalid instances,
/// out-of-range parameters) are the caller's problem. Internal errors signal a
/// broken solver invariant and should never surface on valid input; see
/// [`Error::is_internal`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}[{index}] = {value} is negative")]
    NegativeValue {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{what}[{index}] = {value} is not finite")]
    NonFinite {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("total supply {supply} exceeds total demand {demand}")]
    SupplyExceedsDemand { supply: f64, demand: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("total supply is zero; nothing to transport")]
    ZeroTotalSupply,

    #[error("all costs are zero; any maximum plan is optimal")]
    ZeroMaxCost,

    #[error("integer overflow risk: {0}")]
    OverflowRisk(String),

    #[error("integer plan is not maximum: {0}")]
    NotMaximum(String),

    #[error("plan recovery accounting failed: {0}")]
    InternalAccounting(String),

    #[error("no {direction} residual edge between demand {a} and supply {b}")]
    NoSuchResidualEdge {
        a: usize,
        b: usize,
        direction: &'static str,
    },

    #[error("sink unreachable in Hungarian search while free supply remains")]
    SinkUnreachable,

    #[error("partial DFS found no augmenting path in phase {0}")]
    NoPathInPhase(u64),

    #[error("capacity violation during augmentation: {0}")]
    CapacityViolation(String),

    #[error("phase bound {bound} exceeded")]
    PhaseBoundExceeded { bound: u64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("instance too large for exact solver: {0}")]
    TooLarge(String),

    #[error("instance is not balanced: total demand {demand}, total supply {supply}")]
    NonBalanced { demand: f64, supply: f64 },

    #[error("plan or marginals carry zero total mass")]
    ZeroMass,

    #[error("image has zero total intensity")]
    EmptyImage,

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
    /// True when the error indicates a solver bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::InternalAccounting(_)
                | Error::SinkUnreachable
                | Error::NoPathInPhase(_)
                | Error::CapacityViolation(_)
                | Error::PhaseBoundExceeded { .. }
                | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
