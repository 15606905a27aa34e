//! Multidimensional CUSUM statistics on vector time series.
//!
//! For a `p x n` series `A` (columns indexed by time) and an interval
//! `(s, e]` with split `s < t < e`, the CUSUM vector is
//!
//! ```text
//! sqrt((e-t) / ((e-s)(t-s))) * sum_{r in (s, t]} A_r
//!   - sqrt((t-s) / ((e-s)(e-t))) * sum_{r in (t, e]} A_r
//! ```
//!
//! where `(s, t]` covers 0-based columns `s..t`. Its squared norm peaks near
//! change points of the underlying series, which is what the segmentation
//! module scans for.

use ndarray::{Array1, Array2};

use crate::series::SegmentInterval;
use crate::{Error, Result};

/// A CUSUM vector together with the interval and split that produced it.
#[derive(Debug, Clone)]
pub struct CusumVector {
    pub value: Array1<f64>,
    pub interval: SegmentInterval,
    pub split: usize,
}

impl CusumVector {
    pub fn squared_norm(&self) -> f64 {
        self.value.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }
}

/// Column prefix sums of a `p x n` series; column `i` of `cum` holds the sum
/// of the first `i` series columns. Makes every CUSUM query O(p).
#[derive(Debug, Clone)]
pub struct PrefixSums {
    cum: Array2<f64>,
    n: usize,
}

impl PrefixSums {
    pub fn new(series: &Array2<f64>) -> Self {
        let (p, n) = series.dim();
        let mut cum = Array2::zeros((p, n + 1));
        for t in 0..n {
            let prev = cum.column(t).to_owned();
            let mut next = cum.column_mut(t + 1);
            next.assign(&prev);
            next += &series.column(t);
        }
        Self { cum, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.cum.nrows()
    }

    /// CUSUM vector of the underlying series at split `t` of `(s, e]`.
    /// Caller guarantees `s < t < e <= n`.
    pub fn cusum(&self, interval: SegmentInterval, t: usize) -> Array1<f64> {
        let (s, e) = (interval.s, interval.e);
        debug_assert!(s < t && t < e && e <= self.n);
        let span = (e - s) as f64;
        let left_w = ((e - t) as f64 / (span * (t - s) as f64)).sqrt();
        let right_w = ((t - s) as f64 / (span * (e - t) as f64)).sqrt();
        let mut out = Array1::zeros(self.p());
        let cs = self.cum.column(s);
        let ct = self.cum.column(t);
        let ce = self.cum.column(e);
        for i in 0..self.p() {
            let left = ct[i] - cs[i];
            let right = ce[i] - ct[i];
            out[i] = left_w * left - right_w * right;
        }
        out
    }

    /// Squared CUSUM norm at split `t` of `(s, e]`.
    pub fn cusum_sq_norm(&self, interval: SegmentInterval, t: usize) -> f64 {
        let (s, e) = (interval.s, interval.e);
        debug_assert!(s < t && t < e && e <= self.n);
        let span = (e - s) as f64;
        let left_w = ((e - t) as f64 / (span * (t - s) as f64)).sqrt();
        let right_w = ((t - s) as f64 / (span * (e - t) as f64)).sqrt();
        let cs = self.cum.column(s);
        let ct = self.cum.column(t);
        let ce = self.cum.column(e);
        let mut acc = 0.0;
        for i in 0..self.p() {
            let v = left_w * (ct[i] - cs[i]) - right_w * (ce[i] - ct[i]);
            acc += v * v;
        }
        acc
    }
}

fn validate_split(series_n: usize, interval: SegmentInterval, t: usize) -> Result<()> {
    if interval.e > series_n {
        return Err(Error::Domain(format!(
            "interval ({}, {}] exceeds series length {series_n}",
            interval.s, interval.e
        )));
    }
    if t <= interval.s || t >= interval.e {
        return Err(Error::Domain(format!(
            "split {t} outside the interior of ({}, {}]",
            interval.s, interval.e
        )));
    }
    Ok(())
}

/// CUSUM vector of a `p x n` series at split `t` of `(s, e]`.
pub fn cusum_at(series: &Array2<f64>, interval: SegmentInterval, t: usize) -> Result<CusumVector> {
    let (_, n) = series.dim();
    validate_split(n, interval, t)?;
    let (s, e) = (interval.s, interval.e);
    let span = (e - s) as f64;
    let left_w = ((e - t) as f64 / (span * (t - s) as f64)).sqrt();
    let right_w = ((t - s) as f64 / (span * (e - t) as f64)).sqrt();
    let mut left = Array1::zeros(series.nrows());
    for r in s..t {
        left += &series.column(r);
    }
    let mut right = Array1::zeros(series.nrows());
    for r in t..e {
        right += &series.column(r);
    }
    let value = left_w * left - right_w * right;
    Ok(CusumVector { value, interval, split: t })
}

/// Candidate splits of `(s, e]` under a scan margin: `t` with
/// `s + margin < t < e - margin`.
pub fn candidate_splits(
    interval: SegmentInterval,
    margin: usize,
) -> impl Iterator<Item = usize> + Clone {
    let lo = interval.s + margin + 1;
    let hi = (interval.e + 1).saturating_sub(margin + 1); // exclusive
    lo..hi.max(lo)
}

/// Maximizes the squared CUSUM norm over interior splits of `(s, e]`,
/// skipping `margin` points at each end. Ties break to the smallest split.
///
/// Returns the maximizing split and the attained squared norm.
pub fn best_split(
    series: &Array2<f64>,
    interval: SegmentInterval,
    margin: usize,
) -> Result<(usize, f64)> {
    let prefix = PrefixSums::new(series);
    best_split_prefix(&prefix, interval, margin)
}

/// As [`best_split`], reusing precomputed prefix sums.
pub fn best_split_prefix(
    prefix: &PrefixSums,
    interval: SegmentInterval,
    margin: usize,
) -> Result<(usize, f64)> {
    if interval.e > prefix.n() {
        return Err(Error::Domain(format!(
            "interval ({}, {}] exceeds series length {}",
            interval.s,
            interval.e,
            prefix.n()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for t in candidate_splits(interval, margin) {
        let score = prefix.cusum_sq_norm(interval, t);
        let better = match best {
            None => true,
            Some((_, b)) => score > b,
        };
        if better {
            best = Some((t, score));
        }
    }
    best.ok_or_else(|| {
        Error::IntervalTooShort(format!(
            "({}, {}] admits no splits at margin {margin}",
            interval.s, interval.e
        ))
    })
}

/// Two-block ANOVA projection of a window over `(s, e]` split at `d`:
/// entries covering `(s, d]` are replaced by their mean, entries covering
/// `(d, e]` by theirs. `window.len()` must equal `e - s`.
pub fn piecewise_projection(
    window: &[f64],
    interval: SegmentInterval,
    d: usize,
) -> Result<Vec<f64>> {
    let (s, e) = (interval.s, interval.e);
    if window.len() != e - s {
        return Err(Error::Dimension(format!(
            "window has {} entries but ({s}, {e}] covers {}",
            window.len(),
            e - s
        )));
    }
    if d <= s || d >= e {
        return Err(Error::Domain(format!("split {d} outside the interior of ({s}, {e}]")));
    }
    let cut = d - s;
    let left_mean = window[..cut].iter().sum::<f64>() / cut as f64;
    let right_mean = window[cut..].iter().sum::<f64>() / (window.len() - cut) as f64;
    let mut out = vec![left_mean; cut];
    out.resize(window.len(), right_mean);
    Ok(out)
}
