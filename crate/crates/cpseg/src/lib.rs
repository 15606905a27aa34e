//! Change-point localization for piecewise-constant high-dimensional linear
//! regression.
//!
//! The observed data are pairs `(x_t, y_t)` with `y_t = x_t' b_t + noise`,
//! where the coefficient vectors `b_t` are piecewise constant in `t`. This
//! crate estimates the times at which `b_t` changes:
//!
//! * [`segmentation::bse`] — fits a change-budgeted group-lasso coefficient
//!   path, then segments its multidimensional CUSUM statistic,
//! * [`segmentation::bsle`] — segments directly from per-interval lasso fits,
//! * [`segmentation::lsa`] — refines a coarse estimate with local one-change
//!   refits,
//! * [`segmentation::bssgl`] — segments a fused sparse-group-lasso path.
//!
//! Supporting pieces: sparse solvers ([`solvers`]), CUSUM statistics
//! ([`cusum`]), accuracy metrics ([`eval`]) and a Monte-Carlo benchmark
//! harness ([`sim`]).
//!
//! All public interfaces use 0-based time indices and half-open integer
//! intervals `(s, e]` covering the 0-based rows `s..e`. A change point `v`
//! means the coefficient columns `v-1` and `v` differ, so valid change points
//! lie in `1..n`.

#![forbid(unsafe_code)]

pub mod cusum;
pub mod error;
pub mod eval;
pub mod segmentation;
pub mod series;
pub mod sim;
pub mod solvers;

pub use error::Error;
pub use series::{ChangePointSet, CoefficientPath, RegressionSeries, SegmentInterval};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
