//! Error types shared across the crate.

use thiserror::Error;

/// A task cannot meet its deadline in the requested execution mode: the time
/// left for computation after all transfers is not positive, so no finite
/// processor frequency satisfies the deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("deadline leaves no computation time in this mode")]
pub struct ModeInfeasible;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A decision references an execution mode that cannot meet the deadline.
    #[error("device {device}: {source}")]
    InfeasibleDecision {
        device: usize,
        #[source]
        source: ModeInfeasible,
    },

    /// A decision references a target that does not exist or is inconsistent
    /// with the scenario topology.
    #[error("device {device}: invalid decision: {reason}")]
    InvalidDecision { device: usize, reason: String },

    /// The scenario violates a structural requirement (index ranges, matrix
    /// shapes, positivity of physical parameters).
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A generator or sweep configuration is unusable.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A scenario file does not match the supported schema.
    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
