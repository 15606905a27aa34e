//! Sparse estimation back-ends: weighted group lasso over a fixed partition,
//! the exhaustive partition-constrained fit, per-interval lasso, local
//! single-split fits, and the fused sparse-group path estimator.

mod gram;
mod group_lasso;
mod lasso;
mod sgl;

pub(crate) use gram::{GramPrefix, SegmentGram};
pub(crate) use group_lasso::{partition_objective, solve_partition_grams};
pub(crate) use lasso::LassoScanState;
pub use sgl::{sgl_fit_detailed, sgl_objective};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::series::{CoefficientPath, RegressionSeries, SegmentInterval};
use crate::{Error, Result};

/// Default absolute objective-decrease tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default sweep/iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Default cap on exhaustive partition enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000;

/// Tuning knobs for the partition-constrained estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Group-sparsity weight.
    pub lambda: f64,
    /// Per-segment squared-l2 cap; `f64::INFINITY` disables it.
    pub gamma: f64,
    /// Change budget: the fit uses `kprime + 1` contiguous segments.
    pub kprime: usize,
    /// Convergence tolerance on the objective decrease.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            gamma: f64::INFINITY,
            kprime: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::Config("gamma must be positive or infinite".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fitted partition: segments tiling an interval, one coefficient vector
/// per segment, and the attained penalized objective.
#[derive(Debug, Clone)]
pub struct PartitionFit {
    pub partition: Vec<SegmentInterval>,
    pub coefficients: Vec<Array1<f64>>,
    pub objective: f64,
}

impl PartitionFit {
    /// Expands the segment coefficients into a columnwise-constant path over
    /// the fitted window.
    pub fn to_path(&self) -> Result<CoefficientPath> {
        let offset = self.partition.first().map(|iv| iv.s).unwrap_or(0);
        let shifted: Vec<(SegmentInterval, Array1<f64>)> = self
            .partition
            .iter()
            .zip(&self.coefficients)
            .map(|(iv, a)| {
                (
                    SegmentInterval {
                        s: iv.s - offset,
                        e: iv.e - offset,
                    },
                    a.clone(),
                )
            })
            .collect();
        crate::series::piecewise_path(&shifted)
    }
}

fn validate_tiling(partition: &[SegmentInterval], window: SegmentInterval) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::Tiling("empty partition".into()));
    }
    let mut order: Vec<usize> = (0..partition.len()).collect();
    order.sort_by_key(|&i| partition[i].s);
    let mut cursor = window.s;
    for &i in &order {
        let iv = partition[i];
        if iv.s != cursor || iv.e <= iv.s {
            return Err(Error::Tiling(format!(
                "segment ({}, {}] does not continue the tiling at {cursor}",
                iv.s, iv.e
            )));
        }
        cursor = iv.e;
    }
    if cursor != window.e {
        return Err(Error::Tiling(format!(
            "partition ends at {cursor}, expected {}",
            window.e
        )));
    }
    Ok(())
}

fn grams_for(data: &RegressionSeries, partition: &[SegmentInterval]) -> Vec<SegmentGram> {
    partition
        .iter()
        .map(|iv| {
            let mut seg = SegmentGram::zeros(data.p());
            for t in iv.indices() {
                seg.add_sample(data.row(t), data.y()[t]);
            }
            seg
        })
        .collect()
}

/// Weighted group lasso over a fixed partition of the full series `(0, n]`.
///
/// Minimizes the squared loss plus `lambda * sum_i sqrt(sum_k w_k a_k(i)^2)`
/// subject to `|a_k|^2 <= gamma` per segment.
pub fn group_lasso_on_partition(
    data: &RegressionSeries,
    partition: &[SegmentInterval],
    lambda: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PartitionFit> {
    validate_tiling(partition, data.full_interval())?;
    let mut order: Vec<usize> = (0..partition.len()).collect();
    order.sort_by_key(|&i| partition[i].s);
    let sorted: Vec<SegmentInterval> = order.iter().map(|&i| partition[i]).collect();

    let segs = grams_for(data, &sorted);
    let sol = solve_partition_grams(&segs, lambda, gamma, tol, max_iter, None)?;
    let objective = partition_objective(&segs, &sol.coefs, lambda);
    Ok(PartitionFit {
        partition: sorted,
        coefficients: sol.coefs,
        objective,
    })
}

/// Smallest `lambda` for which the all-zero solution is optimal on the given
/// partition.
pub fn group_lasso_lambda_max(data: &RegressionSeries, partition: &[SegmentInterval]) -> f64 {
    group_lasso::lambda_max_grams(&grams_for(data, partition))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive best-partition fit of `(s, e]` into `kprime + 1` contiguous
/// segments, each solved by the group lasso. Returns the minimum-objective
/// fit expanded to a path over the window (column 0 is time `s`).
pub fn best_partition_fit(
    data: &RegressionSeries,
    config: &SolverConfig,
    restrict: SegmentInterval,
) -> Result<(CoefficientPath, PartitionFit)> {
    best_partition_fit_with_budget(data, config, restrict, DEFAULT_ENUMERATION_BUDGET)
}

/// As [`best_partition_fit`] with an explicit enumeration budget.
pub fn best_partition_fit_with_budget(
    data: &RegressionSeries,
    config: &SolverConfig,
    restrict: SegmentInterval,
    budget: u128,
) -> Result<(CoefficientPath, PartitionFit)> {
    config.validate()?;
    if restrict.e > data.n() {
        return Err(Error::Domain(format!(
            "window ({}, {}] exceeds series length {}",
            restrict.s,
            restrict.e,
            data.n()
        )));
    }
    let len = restrict.len();
    let kp = config.kprime;
    if kp + 1 > len {
        return Err(Error::Domain(format!(
            "cannot split ({}, {}] into {} segments",
            restrict.s,
            restrict.e,
            kp + 1
        )));
    }
    let count = binomial(len - 1, kp);
    if count > budget {
        return Err(Error::Budget {
            required: count,
            budget,
        });
    }

    let prefix = GramPrefix::new(data, restrict);
    let mut boundaries: Vec<usize> = (0..kp).map(|i| restrict.s + 1 + i).collect();
    let mut best: Option<(f64, Vec<SegmentInterval>, Vec<Array1<f64>>)> = None;
    let mut warm: Option<Vec<Array1<f64>>> = None;

    loop {
        let mut partition = Vec::with_capacity(kp + 1);
        let mut s = restrict.s;
        for &b in &boundaries {
            partition.push(SegmentInterval { s, e: b });
            s = b;
        }
        partition.push(SegmentInterval { s, e: restrict.e });

        let segs: Vec<SegmentGram> = partition.iter().map(|iv| prefix.segment(*iv)).collect();
        let sol = solve_partition_grams(
            &segs,
            config.lambda,
            config.gamma,
            config.tol,
            config.max_iter,
            warm.as_deref(),
        )?;
        let obj = partition_objective(&segs, &sol.coefs, config.lambda);
        let better = match &best {
            None => true,
            Some((b, _, _)) => obj < *b,
        };
        if better {
            best = Some((obj, partition, sol.coefs.clone()));
        }
        warm = Some(sol.coefs);

        // Advance the boundary odometer in lexicographic order.
        let mut j = kp;
        loop {
            if j == 0 {
                break;
            }
            let idx = j - 1;
            let limit = restrict.e - 1 - (kp - 1 - idx);
            if boundaries[idx] < limit {
                boundaries[idx] += 1;
                for l in idx + 1..kp {
                    boundaries[l] = boundaries[l - 1] + 1;
                }
                break;
            }
            j -= 1;
        }
        if j == 0 {
            break;
        }
    }

    let (objective, partition, coefficients) = best.expect("at least one partition enumerated");
    let fit = PartitionFit {
        partition,
        coefficients,
        objective,
    };
    let path = fit.to_path()?;
    Ok((path, fit))
}

/// l1-penalized fit on `(s, e]`: minimizes
/// `sum_{t in (s, e]} (y_t - x_t'v)^2 + lambda sqrt(e - s) |v|_1`.
pub fn lasso_on_interval(
    data: &RegressionSeries,
    interval: SegmentInterval,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Array1<f64>> {
    if interval.e > data.n() || interval.is_empty() {
        return Err(Error::Domain(format!(
            "interval ({}, {}] invalid for series of length {}",
            interval.s,
            interval.e,
            data.n()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::Config("lambda must be nonnegative".into()));
    }
    let mut state = LassoScanState::new(data.p());
    for t in interval.indices() {
        state.add_sample(data.row(t), data.y()[t]);
    }
    let lam_eff = lambda * (interval.len() as f64).sqrt();
    state.solve(lam_eff, tol, max_iter)?;
    Ok(state.coef)
}

/// Smallest `lambda` for which the interval lasso returns zero:
/// `2 |sum_t x_t y_t|_inf / sqrt(e - s)`.
pub fn lasso_lambda_max(data: &RegressionSeries, interval: SegmentInterval) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..data.p() {
        let mut acc = 0.0;
        for t in interval.indices() {
            acc += data.x()[(t, i)] * data.y()[t];
        }
        sup = sup.max(acc.abs());
    }
    2.0 * sup / (interval.len() as f64).sqrt()
}

/// A forced one-change fit of an interval.
#[derive(Debug, Clone)]
pub struct SplitFit {
    /// Objective-minimizing split point (global index).
    pub split: usize,
    /// Two-segment path over the window; column 0 is time `s`.
    pub path: CoefficientPath,
    pub objective: f64,
}

/// Scans every split `d` of `(s, e]` and solves the two-segment group lasso
/// `{(s, d], (d, e]}`, returning the objective minimizer (ties to the
/// smallest split).
pub fn single_split_fit(
    data: &RegressionSeries,
    interval: SegmentInterval,
    lambda: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SplitFit> {
    if interval.e > data.n() {
        return Err(Error::Domain(format!(
            "interval ({}, {}] exceeds series length {}",
            interval.s,
            interval.e,
            data.n()
        )));
    }
    if interval.len() < 3 {
        return Err(Error::IntervalTooShort(format!(
            "single-split fit needs e - s >= 3, got ({}, {}]",
            interval.s, interval.e
        )));
    }
    let prefix = GramPrefix::new(data, interval);
    let mut best: Option<(f64, usize, Vec<Array1<f64>>)> = None;
    let mut warm: Option<Vec<Array1<f64>>> = None;
    for d in interval.s + 1..interval.e {
        let segs = [
            prefix.segment(SegmentInterval { s: interval.s, e: d }),
            prefix.segment(SegmentInterval { s: d, e: interval.e }),
        ];
        let sol = solve_partition_grams(&segs, lambda, gamma, tol, max_iter, warm.as_deref())?;
        let obj = partition_objective(&segs, &sol.coefs, lambda);
        let better = match &best {
            None => true,
            Some((b, _, _)) => obj < *b,
        };
        if better {
            best = Some((obj, d, sol.coefs.clone()));
        }
        warm = Some(sol.coefs);
    }
    let (objective, split, coefs) = best.expect("at least one split scanned");
    let fit = PartitionFit {
        partition: vec![
            SegmentInterval { s: interval.s, e: split },
            SegmentInterval { s: split, e: interval.e },
        ],
        coefficients: coefs,
        objective,
    };
    Ok(SplitFit {
        split,
        path: fit.to_path()?,
        objective,
    })
}

/// Configuration for the fused sparse-group path fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SglConfig {
    /// Group-fusion weight on `|b_{t+1} - b_t|_2`.
    pub lambda: f64,
    /// Entrywise fusion weight on `|b_{t+1} - b_t|_1`.
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SglConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            gamma: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Fused sparse-group path fit; see [`sgl_fit_detailed`] for the objective.
pub fn sgl_fit(
    data: &RegressionSeries,
    lambda: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<CoefficientPath> {
    sgl_fit_detailed(data, lambda, gamma, tol, max_iter).map(|(path, _)| path)
}

/// Hold-out tuning helper for the fused path fit: every `holdout_every`-th
/// time step is scored out-of-fit and the grid pair with the smallest
/// held-out squared error wins. Returns `(lambda, gamma)`.
pub fn sgl_select(
    data: &RegressionSeries,
    grid: &[(f64, f64)],
    holdout_every: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::Config("empty tuning grid".into()));
    }
    let stride = holdout_every.max(2);
    let mut best: Option<((f64, f64), f64)> = None;
    for &(lambda, gamma) in grid {
        let path = sgl_fit(data, lambda, gamma, tol, max_iter)?;
        let mut err = 0.0;
        for t in (0..data.n()).step_by(stride) {
            let r = data.row(t).dot(&path.column(t)) - data.y()[t];
            err += r * r;
        }
        let better = match best {
            None => true,
            Some((_, b)) => err < b,
        };
        if better {
            best = Some(((lambda, gamma), err));
        }
    }
    Ok(best.expect("nonempty grid").0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn toy_series(n: usize, p: usize, seed: u64) -> RegressionSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
        RegressionSeries::new(x, y).unwrap()
    }

    #[test]
    fn unpenalized_single_segment_is_least_squares() {
        let data = toy_series(12, 3, 1);
        let fit = group_lasso_on_partition(
            &data,
            &[data.full_interval()],
            0.0,
            f64::INFINITY,
            1e-12,
            50_000,
        )
        .unwrap();
        // Residual orthogonal to every column.
        let coef = &fit.coefficients[0];
        for i in 0..3 {
            let mut dot = 0.0;
            for t in 0..12 {
                let fitted = data.row(t).dot(coef);
                dot += data.x()[(t, i)] * (data.y()[t] - fitted);
            }
            assert!(dot.abs() < 1e-8, "column {i} correlation {dot}");
        }
    }

    #[test]
    fn lambda_above_max_zeroes_solution() {
        let data = toy_series(10, 4, 2);
        let partition = vec![
            SegmentInterval::new(0, 5).unwrap(),
            SegmentInterval::new(5, 10).unwrap(),
        ];
        let lmax = group_lasso_lambda_max(&data, &partition);
        let fit = group_lasso_on_partition(&data, &partition, lmax * 1.0001, f64::INFINITY, 1e-12, 10_000)
            .unwrap();
        for a in &fit.coefficients {
            assert!(a.iter().all(|v| *v == 0.0));
        }
        // Just below the threshold something activates.
        let fit2 = group_lasso_on_partition(&data, &partition, lmax * 0.99, f64::INFINITY, 1e-12, 10_000)
            .unwrap();
        assert!(fit2.coefficients.iter().any(|a| a.iter().any(|v| *v != 0.0)));
    }

    #[test]
    fn gamma_cap_is_enforced() {
        let data = toy_series(14, 3, 3);
        let gamma = 0.01;
        let fit = group_lasso_on_partition(
            &data,
            &[
                SegmentInterval::new(0, 7).unwrap(),
                SegmentInterval::new(7, 14).unwrap(),
            ],
            0.1,
            gamma,
            1e-10,
            10_000,
        )
        .unwrap();
        for a in &fit.coefficients {
            let sq: f64 = a.iter().map(|v| v * v).sum();
            assert!(sq <= gamma + 1e-10);
        }
    }

    #[test]
    fn non_tiling_partition_rejected() {
        let data = toy_series(8, 2, 4);
        let bad = vec![
            SegmentInterval::new(0, 3).unwrap(),
            SegmentInterval::new(4, 8).unwrap(),
        ];
        assert!(matches!(
            group_lasso_on_partition(&data, &bad, 0.0, f64::INFINITY, 1e-8, 100),
            Err(Error::Tiling(_))
        ));
    }

    #[test]
    fn best_partition_recovers_noiseless_split() {
        // x = 1, y = (0,0,2,2): split at 2 fits exactly.
        let x = Array2::from_elem((4, 1), 1.0);
        let y = array![0.0, 0.0, 2.0, 2.0];
        let data = RegressionSeries::new(x, y).unwrap();
        let config = SolverConfig {
            kprime: 1,
            ..SolverConfig::default()
        };
        let (path, fit) = best_partition_fit(&data, &config, data.full_interval()).unwrap();
        assert_eq!(fit.partition[0].e, 2);
        assert!(fit.objective.abs() < 1e-12);
        assert_eq!(path.change_points().points(), &[2]);
        assert!((path.column(0)[0] - 0.0).abs() < 1e-9);
        assert!((path.column(3)[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kprime_zero_matches_single_segment_fit() {
        let data = toy_series(9, 2, 5);
        let config = SolverConfig {
            lambda: 0.3,
            ..SolverConfig::default()
        };
        let (_, fit) = best_partition_fit(&data, &config, data.full_interval()).unwrap();
        let direct = group_lasso_on_partition(
            &data,
            &[data.full_interval()],
            0.3,
            f64::INFINITY,
            DEFAULT_TOL,
            DEFAULT_MAX_ITER,
        )
        .unwrap();
        assert!((fit.objective - direct.objective).abs() < 1e-9);
    }

    #[test]
    fn objective_nonincreasing_in_kprime() {
        let data = toy_series(10, 2, 6);
        let mut prev = f64::INFINITY;
        for kp in 0..3usize {
            let config = SolverConfig {
                lambda: 0.2,
                kprime: kp,
                ..SolverConfig::default()
            };
            let (_, fit) = best_partition_fit(&data, &config, data.full_interval()).unwrap();
            assert!(fit.objective <= prev + 1e-9);
            prev = fit.objective;
        }
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let data = toy_series(40, 2, 7);
        let config = SolverConfig {
            kprime: 3,
            ..SolverConfig::default()
        };
        let err =
            best_partition_fit_with_budget(&data, &config, data.full_interval(), 100).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn change_count_bounded_by_kprime() {
        let data = toy_series(12, 2, 8);
        let config = SolverConfig {
            lambda: 0.1,
            kprime: 2,
            ..SolverConfig::default()
        };
        let (path, _) = best_partition_fit(&data, &config, data.full_interval()).unwrap();
        assert!(path.change_count() <= 2);
    }

    #[test]
    fn lasso_zero_lambda_is_ols() {
        let data = toy_series(15, 2, 9);
        let iv = data.full_interval();
        let coef = lasso_on_interval(&data, iv, 0.0, 1e-13, 100_000).unwrap();
        for i in 0..2 {
            let mut dot = 0.0;
            for t in 0..15 {
                dot += data.x()[(t, i)] * (data.y()[t] - data.row(t).dot(&coef));
            }
            assert!(dot.abs() < 1e-8);
        }
    }

    #[test]
    fn lasso_lambda_max_zeroes() {
        let data = toy_series(10, 3, 10);
        let iv = data.full_interval();
        let lmax = lasso_lambda_max(&data, iv);
        let coef = lasso_on_interval(&data, iv, lmax * 1.0001, 1e-12, 10_000).unwrap();
        assert!(coef.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn lasso_empty_interval_is_domain_error() {
        let data = toy_series(6, 2, 11);
        assert!(lasso_on_interval(&data, SegmentInterval { s: 3, e: 3 }, 0.1, 1e-8, 10).is_err());
    }

    #[test]
    fn single_split_noiseless_example() {
        let x = Array2::from_elem((4, 1), 1.0);
        let y = array![0.0, 0.0, 4.0, 4.0];
        let data = RegressionSeries::new(x, y).unwrap();
        let fit = single_split_fit(&data, data.full_interval(), 0.0, f64::INFINITY, 1e-12, 10_000)
            .unwrap();
        assert_eq!(fit.split, 2);
        assert!(fit.objective < 1e-12);
        assert!((fit.path.column(0)[0]).abs() < 1e-9);
        assert!((fit.path.column(2)[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn single_split_short_interval_errors() {
        let data = toy_series(8, 2, 12);
        assert!(matches!(
            single_split_fit(&data, SegmentInterval { s: 2, e: 4 }, 0.0, f64::INFINITY, 1e-8, 100),
            Err(Error::IntervalTooShort(_))
        ));
    }

    #[test]
    fn single_split_objective_at_most_unsplit() {
        let data = toy_series(10, 2, 13);
        let fit = single_split_fit(&data, data.full_interval(), 0.2, f64::INFINITY, 1e-10, 10_000)
            .unwrap();
        let unsplit = group_lasso_on_partition(
            &data,
            &[data.full_interval()],
            0.2,
            f64::INFINITY,
            1e-10,
            10_000,
        )
        .unwrap();
        assert!(fit.objective <= unsplit.objective + 1e-8);
    }

    #[test]
    fn sgl_requires_a_penalty() {
        let data = toy_series(6, 2, 14);
        assert!(matches!(
            sgl_fit(&data, 0.0, 0.0, 1e-8, 100),
            Err(Error::IllPosed(_))
        ));
    }

    #[test]
    fn sgl_strong_fusion_yields_constant_path() {
        let data = toy_series(10, 2, 15);
        let path = sgl_fit(&data, 1e6, 1e6, 1e-12, 5_000).unwrap();
        assert_eq!(path.change_count(), 0);
    }

    #[test]
    fn sgl_descent_is_monotone() {
        let data = toy_series(12, 3, 16);
        let (_, trace) = sgl_fit_detailed(&data, 0.8, 0.4, 1e-10, 2_000).unwrap();
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective increased: {} -> {}", w[0], w[1]);
        }
    }
}
