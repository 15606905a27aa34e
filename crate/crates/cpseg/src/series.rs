//! Domain types shared by all modules: the observed regression series, the
//! coefficient path, change-point sets and integer intervals.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Half-open integer interval `(s, e]`, covering the 0-based time indices
/// `s..e`. `s` is the exclusive left end, `e` the inclusive right end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentInterval {
    pub s: usize,
    pub e: usize,
}

impl SegmentInterval {
    pub fn new(s: usize, e: usize) -> Result<Self> {
        if s >= e {
            return Err(Error::Domain(format!("interval ({s}, {e}] is empty")));
        }
        Ok(Self { s, e })
    }

    /// Number of time indices covered.
    pub fn len(&self) -> usize {
        self.e - self.s
    }

    pub fn is_empty(&self) -> bool {
        self.s >= self.e
    }

    /// 0-based row indices covered by the interval.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.s..self.e
    }

    /// Intersection with another interval, if nonempty.
    pub fn clip(&self, other: &SegmentInterval) -> Option<SegmentInterval> {
        let s = self.s.max(other.s);
        let e = self.e.min(other.e);
        (s < e).then_some(SegmentInterval { s, e })
    }
}

fn all_finite(values: impl Iterator<Item = f64>) -> bool {
    let mut iter = values;
    iter.all(f64::is_finite)
}

/// The observed stream `(x_t, y_t)`: an `n x p` design matrix (rows are time
/// steps) and a length-`n` response vector.
#[derive(Debug, Clone)]
pub struct RegressionSeries {
    x: Array2<f64>,
    y: Array1<f64>,
}

impl RegressionSeries {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n != y.len() {
            return Err(Error::Dimension(format!(
                "design has {n} rows but response has {} entries",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 time steps, got {n}")));
        }
        if p < 1 {
            return Err(Error::Dimension("need at least 1 feature".into()));
        }
        if !all_finite(x.iter().copied()) || !all_finite(y.iter().copied()) {
            return Err(Error::Numeric("series contains non-finite entries".into()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    /// Covariate row at time `t`.
    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.x.row(t)
    }

    /// The full interval `(0, n]`.
    pub fn full_interval(&self) -> SegmentInterval {
        SegmentInterval { s: 0, e: self.n() }
    }
}

/// A `p x n` matrix of per-time coefficient vectors; column `t` is the
/// coefficient vector in force at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath {
    beta: Array2<f64>,
}

impl CoefficientPath {
    pub fn new(beta: Array2<f64>) -> Result<Self> {
        if beta.nrows() == 0 || beta.ncols() == 0 {
            return Err(Error::Dimension("coefficient path must be nonempty".into()));
        }
        if !all_finite(beta.iter().copied()) {
            return Err(Error::Numeric("coefficient path contains non-finite entries".into()));
        }
        Ok(Self { beta })
    }

    pub fn p(&self) -> usize {
        self.beta.nrows()
    }

    pub fn n(&self) -> usize {
        self.beta.ncols()
    }

    pub fn column(&self, t: usize) -> ArrayView1<'_, f64> {
        self.beta.column(t)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.beta
    }

    pub fn into_array(self) -> Array2<f64> {
        self.beta
    }

    /// Number of time steps `t` whose column differs from column `t+1`
    /// (exact floating equality of all entries).
    pub fn change_count(&self) -> usize {
        (1..self.n())
            .filter(|&t| self.column(t) != self.column(t - 1))
            .count()
    }

    /// Change points of the path: every `v` in `1..n` whose column differs
    /// from column `v-1`.
    pub fn change_points(&self) -> ChangePointSet {
        let points = (1..self.n())
            .filter(|&t| self.column(t) != self.column(t - 1))
            .collect();
        ChangePointSet {
            points,
            n: self.n(),
        }
    }
}

/// Number of changes of a coefficient path.
pub fn change_count(path: &CoefficientPath) -> usize {
    path.change_count()
}

/// Mean squared coefficient error `(1/n) sum_t |est_t - truth_t|^2`.
pub fn coefficient_mse(estimate: &CoefficientPath, truth: &CoefficientPath) -> Result<f64> {
    if estimate.beta.dim() != truth.beta.dim() {
        return Err(Error::Dimension(format!(
            "path shapes differ: {:?} vs {:?}",
            estimate.beta.dim(),
            truth.beta.dim()
        )));
    }
    let n = estimate.n() as f64;
    let sq: f64 = estimate
        .beta
        .iter()
        .zip(truth.beta.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sq / n)
}

/// Builds a piecewise-constant path from segments tiling `(0, n]`.
///
/// Segments may be given in any order; they must cover `(0, n]` without gaps
/// or overlaps and all vectors must share one length.
pub fn piecewise_path(segments: &[(SegmentInterval, Array1<f64>)]) -> Result<CoefficientPath> {
    if segments.is_empty() {
        return Err(Error::Tiling("no segments given".into()));
    }
    let p = segments[0].1.len();
    if p == 0 {
        return Err(Error::Dimension("segment vectors must be nonempty".into()));
    }
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by_key(|&i| segments[i].0.s);

    let mut cursor = 0usize;
    for &i in &order {
        let (iv, v) = &segments[i];
        if v.len() != p {
            return Err(Error::Dimension(format!(
                "segment vector length {} != {p}",
                v.len()
            )));
        }
        if iv.s != cursor {
            return Err(Error::Tiling(format!(
                "expected segment starting at {cursor}, found ({}, {}]",
                iv.s, iv.e
            )));
        }
        cursor = iv.e;
    }
    let n = cursor;

    let mut beta = Array2::zeros((p, n));
    for (iv, v) in segments {
        for t in iv.indices() {
            beta.column_mut(t).assign(v);
        }
    }
    CoefficientPath::new(beta)
}

/// Sorted interior change indices of a length-`n` series. A point `v` means
/// the coefficients at times `v-1` and `v` differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePointSet {
    points: Vec<usize>,
    n: usize,
}

impl ChangePointSet {
    pub fn new(points: Vec<usize>, n: usize) -> Result<Self> {
        for w in points.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Domain(format!(
                    "change points must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let (Some(&first), Some(&last)) = (points.first(), points.last()) {
            if first == 0 || last >= n {
                return Err(Error::Domain(format!(
                    "change points must be interior to (0, {n})"
                )));
            }
        }
        Ok(Self { points, n })
    }

    pub fn empty(n: usize) -> Self {
        Self { points: Vec::new(), n }
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments `(0, v_1], (v_1, v_2], ..., (v_K, n]` induced by the points.
    pub fn segments(&self) -> Vec<SegmentInterval> {
        let mut out = Vec::with_capacity(self.points.len() + 1);
        let mut s = 0usize;
        for &v in &self.points {
            out.push(SegmentInterval { s, e: v });
            s = v;
        }
        out.push(SegmentInterval { s, e: self.n });
        out
    }
}
