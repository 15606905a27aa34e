//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A segment list does not tile its target interval.
    #[error("invalid tiling: {0}")]
    Tiling(String),

    /// An index or split point lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An interval admits no candidate split points.
    #[error("interval too short: {0}")]
    IntervalTooShort(String),

    /// Exhaustive partition search would exceed its enumeration budget.
    #[error(
        "enumeration budget exceeded: {required} candidate partitions > budget {budget}; \
         lower the change budget or use bsle"
    )]
    Budget { required: u128, budget: u128 },

    /// A solver produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The requested optimization problem has no usable minimizer.
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Directed Hausdorff distance from an empty reference set.
    #[error("empty reference set")]
    EmptyReference,
}
