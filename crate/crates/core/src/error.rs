//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution spec's (mean, variance) pair has no valid
    /// parameterization for the requested family.
    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    /// A procedure or problem parameter violates its contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An active alternative's sample variance is zero in unknown-variance
    /// mode. Set `BizParams::variance_floor` to opt into flooring instead.
    #[error("zero sample variance estimate for alternative {alternative} at stage {stage}")]
    ZeroVarianceEstimate { alternative: usize, stage: u64 },

    /// The run exceeded its safety cap; the configuration is suspected
    /// non-terminating or pathological.
    #[error("safety cap exceeded: {total_samples} samples drawn (cap {cap})")]
    StageCapExceeded { total_samples: u64, cap: u64 },

    /// A Monte Carlo replication failed; carries the replication index.
    #[error("replication {index} failed: {source}")]
    Replication {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    /// Confidence-interval request with zero replications.
    #[error("confidence interval undefined for zero replications")]
    EmptyReplications,
}
