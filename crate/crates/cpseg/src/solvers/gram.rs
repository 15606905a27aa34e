//! Gram-matrix accumulation shared by the solvers.
//!
//! Every solver in this module works on normal equations: for a sample range
//! it needs `G = sum x_t x_t'`, `g = sum x_t y_t` and `sum y_t^2`. Prefix
//! accumulation makes any sub-range available in O(p^2), which is what lets
//! split scans and partition enumeration reuse work.

use ndarray::{Array1, Array2, ArrayView1};

use crate::series::{RegressionSeries, SegmentInterval};

/// Normal-equation summary of one sample segment.
#[derive(Debug, Clone)]
pub(crate) struct SegmentGram {
    pub gram: Array2<f64>,
    pub xty: Array1<f64>,
    pub yy: f64,
    pub len: usize,
}

impl SegmentGram {
    pub fn zeros(p: usize) -> Self {
        Self {
            gram: Array2::zeros((p, p)),
            xty: Array1::zeros(p),
            yy: 0.0,
            len: 0,
        }
    }

    pub fn add_sample(&mut self, x: ArrayView1<'_, f64>, y: f64) {
        let p = self.xty.len();
        for i in 0..p {
            let xi = x[i];
            if xi != 0.0 {
                let mut row = self.gram.row_mut(i);
                for j in 0..p {
                    row[j] += xi * x[j];
                }
            }
        }
        for i in 0..p {
            self.xty[i] += x[i] * y;
        }
        self.yy += y * y;
        self.len += 1;
    }

    /// Quadratic part of the residual sum of squares at `coef`:
    /// `yy - 2 g'coef + coef' G coef`.
    pub fn rss(&self, coef: &Array1<f64>) -> f64 {
        let gc = self.gram.dot(coef);
        self.yy - 2.0 * self.xty.dot(coef) + coef.dot(&gc)
    }
}

/// Prefix Gram sums over a window of the series; any sub-segment's
/// [`SegmentGram`] is a subtraction away.
#[derive(Debug)]
pub(crate) struct GramPrefix {
    window: SegmentInterval,
    xx: Vec<Array2<f64>>,
    xy: Vec<Array1<f64>>,
    yy: Vec<f64>,
}

impl GramPrefix {
    pub fn new(data: &RegressionSeries, window: SegmentInterval) -> Self {
        let p = data.p();
        let len = window.len();
        let mut xx = Vec::with_capacity(len + 1);
        let mut xy = Vec::with_capacity(len + 1);
        let mut yy = Vec::with_capacity(len + 1);
        xx.push(Array2::zeros((p, p)));
        xy.push(Array1::zeros(p));
        yy.push(0.0);
        let mut acc = SegmentGram::zeros(p);
        for t in window.indices() {
            acc.add_sample(data.row(t), data.y()[t]);
            xx.push(acc.gram.clone());
            xy.push(acc.xty.clone());
            yy.push(acc.yy);
        }
        Self { window, xx, xy, yy }
    }

    /// Gram summary of the sub-segment `(s, e]` (global indices).
    pub fn segment(&self, seg: SegmentInterval) -> SegmentGram {
        debug_assert!(seg.s >= self.window.s && seg.e <= self.window.e);
        let a = seg.s - self.window.s;
        let b = seg.e - self.window.s;
        SegmentGram {
            gram: &self.xx[b] - &self.xx[a],
            xty: &self.xy[b] - &self.xy[a],
            yy: self.yy[b] - self.yy[a],
            len: seg.len(),
        }
    }
}
