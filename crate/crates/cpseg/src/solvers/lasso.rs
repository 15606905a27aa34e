//! l1-penalized least squares on a sample segment, solved by cyclic
//! coordinate descent on the normal equations.
//!
//! The objective carries no 1/2 factor: `sum (y - x'v)^2 + lam_eff |v|_1`,
//! so the coordinate update soft-thresholds at `lam_eff / 2`.

use ndarray::{Array1, ArrayView1};

use crate::solvers::gram::SegmentGram;
use crate::{Error, Result};

fn soft_threshold(v: f64, thr: f64) -> f64 {
    if v > thr {
        v - thr
    } else if v < -thr {
        v + thr
    } else {
        0.0
    }
}

pub(crate) fn lasso_objective(seg: &SegmentGram, coef: &Array1<f64>, lam_eff: f64) -> f64 {
    seg.rss(coef) + lam_eff * coef.iter().map(|v| v.abs()).sum::<f64>()
}

/// Cyclic coordinate descent with maintained dual residual `rho = g - G v`.
/// Stops when the objective decrease falls below `tol`.
pub(crate) fn solve_lasso_grams(
    seg: &SegmentGram,
    lam_eff: f64,
    tol: f64,
    max_iter: usize,
    coef: &mut Array1<f64>,
    rho: &mut Array1<f64>,
) -> Result<f64> {
    let p = coef.len();
    let mut prev = lasso_objective(seg, coef, lam_eff);
    let mut obj = prev;
    for _ in 0..max_iter {
        for i in 0..p {
            let gii = seg.gram[(i, i)];
            if gii <= 0.0 {
                continue;
            }
            let b = rho[i] + gii * coef[i];
            let new = soft_threshold(b, lam_eff / 2.0) / gii;
            let delta = new - coef[i];
            if delta != 0.0 {
                rho.scaled_add(-delta, &seg.gram.row(i));
                coef[i] = new;
            }
        }
        obj = lasso_objective(seg, coef, lam_eff);
        if !obj.is_finite() {
            return Err(Error::Numeric("lasso objective diverged".into()));
        }
        if prev - obj < tol {
            break;
        }
        prev = obj;
    }
    Ok(obj)
}

/// Incremental lasso state for split scans: samples are appended one at a
/// time (rank-one Gram updates) and each solve warm-starts from the previous
/// split's coefficients.
#[derive(Debug, Clone)]
pub(crate) struct LassoScanState {
    pub seg: SegmentGram,
    pub coef: Array1<f64>,
    rho: Array1<f64>,
}

impl LassoScanState {
    pub fn new(p: usize) -> Self {
        Self {
            seg: SegmentGram::zeros(p),
            coef: Array1::zeros(p),
            rho: Array1::zeros(p),
        }
    }

    pub fn add_sample(&mut self, x: ArrayView1<'_, f64>, y: f64) {
        // rho = g - G v gains x (y - x'v) when (x, y) joins the segment.
        let fitted = x.dot(&self.coef);
        self.seg.add_sample(x, y);
        self.rho.scaled_add(y - fitted, &x);
    }

    pub fn solve(&mut self, lam_eff: f64, tol: f64, max_iter: usize) -> Result<f64> {
        solve_lasso_grams(&self.seg, lam_eff, tol, max_iter, &mut self.coef, &mut self.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::gram::SegmentGram;
    use ndarray::array;

    fn seg_from_rows(rows: &[(Vec<f64>, f64)]) -> SegmentGram {
        let p = rows[0].0.len();
        let mut seg = SegmentGram::zeros(p);
        for (x, y) in rows {
            seg.add_sample(Array1::from_vec(x.clone()).view(), *y);
        }
        seg
    }

    use ndarray::Array1;

    #[test]
    fn orthonormal_design_soft_thresholds() {
        // Identity design over 2 samples: v_i = S(x'y, lam/2).
        let seg = seg_from_rows(&[(vec![1.0, 0.0], 3.0), (vec![0.0, 1.0], -0.4)]);
        let lam_eff = 1.0;
        let mut coef = Array1::zeros(2);
        let mut rho = seg.xty.clone();
        solve_lasso_grams(&seg, lam_eff, 1e-12, 1000, &mut coef, &mut rho).unwrap();
        assert!((coef[0] - 2.5).abs() < 1e-10);
        assert_eq!(coef[1], 0.0);
    }

    #[test]
    fn scan_state_matches_batch_solution() {
        let rows = [
            (vec![1.0, 0.3], 1.2),
            (vec![-0.5, 1.1], 0.3),
            (vec![0.2, -0.7], -0.9),
            (vec![0.9, 0.4], 1.0),
        ];
        let mut state = LassoScanState::new(2);
        for (x, y) in &rows {
            state.add_sample(array![x[0], x[1]].view(), *y);
        }
        let obj_incremental = state.solve(0.7, 1e-12, 2000).unwrap();

        let seg = seg_from_rows(&rows);
        let mut coef = Array1::zeros(2);
        let mut rho = seg.xty.clone();
        let obj_batch =
            solve_lasso_grams(&seg, 0.7, 1e-12, 2000, &mut coef, &mut rho).unwrap();
        assert!((obj_incremental - obj_batch).abs() < 1e-8);
        for i in 0..2 {
            assert!((state.coef[i] - coef[i]).abs() < 1e-6);
        }
    }
}
