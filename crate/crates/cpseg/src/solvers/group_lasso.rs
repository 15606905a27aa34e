//! Weighted group lasso over a fixed contiguous partition.
//!
//! For segments `I_1..I_K` with per-segment coefficients `a_k`, minimizes
//!
//! ```text
//! sum_k sum_{t in I_k} (y_t - x_t' a_k)^2
//!   + lambda * sum_i sqrt(sum_k w_k a_k(i)^2),        w_k = |I_k|
//! ```
//!
//! optionally subject to `|a_k|_2^2 <= gamma` per segment. Solved by block
//! coordinate descent over the p per-feature groups; the segments are
//! disjoint samples, so within a feature the quadratic is diagonal across
//! segments and the group prox reduces to a scalar root-find.

use ndarray::Array1;

use crate::solvers::gram::SegmentGram;
use crate::{Error, Result};

/// Scaled group prox: minimizes `sum_k d_k u_k^2 - 2 c_k u_k + lambda |u|_2`.
///
/// The stationarity condition gives `u_k = 2 c_k nu / (2 d_k nu + lambda)`
/// with `nu = |u|_2` solving `sum_k (2 c_k / (2 d_k nu + lambda))^2 = 1`;
/// the solution is zero iff `|2c|_2 <= lambda`. Newton from below converges
/// monotonically because the root function is convex and decreasing.
fn group_prox_scaled(c: &[f64], d: &[f64], lambda: f64) -> Vec<f64> {
    let norm2c_sq: f64 = c.iter().map(|v| 4.0 * v * v).sum();
    if norm2c_sq <= lambda * lambda {
        return vec![0.0; c.len()];
    }
    let f = |nu: f64| -> f64 {
        c.iter()
            .zip(d)
            .map(|(&ck, &dk)| {
                let denom = 2.0 * dk * nu + lambda;
                let r = 2.0 * ck / denom;
                r * r
            })
            .sum::<f64>()
            - 1.0
    };
    let fprime = |nu: f64| -> f64 {
        c.iter()
            .zip(d)
            .map(|(&ck, &dk)| {
                let denom = 2.0 * dk * nu + lambda;
                -2.0 * (2.0 * ck) * (2.0 * ck) * (2.0 * dk) / (denom * denom * denom)
            })
            .sum()
    };
    let mut nu = 0.0;
    for _ in 0..200 {
        let fv = f(nu);
        if fv <= 1e-15 {
            break;
        }
        let fp = fprime(nu);
        if fp >= 0.0 {
            break;
        }
        let next = nu - fv / fp;
        if !(next > nu) || !next.is_finite() {
            break;
        }
        if next - nu <= 1e-16 * (1.0 + nu) {
            nu = next;
            break;
        }
        nu = next;
    }
    c.iter()
        .zip(d)
        .map(|(&ck, &dk)| 2.0 * ck * nu / (2.0 * dk * nu + lambda))
        .collect()
}

/// Penalized objective of a candidate solution over the given segments.
pub(crate) fn partition_objective(
    segs: &[SegmentGram],
    coefs: &[Array1<f64>],
    lambda: f64,
) -> f64 {
    let p = coefs[0].len();
    let mut obj: f64 = segs.iter().zip(coefs).map(|(s, a)| s.rss(a)).sum();
    if lambda > 0.0 {
        for i in 0..p {
            let group_sq: f64 = segs
                .iter()
                .zip(coefs)
                .map(|(s, a)| s.len as f64 * a[i] * a[i])
                .sum();
            obj += lambda * group_sq.sqrt();
        }
    }
    obj
}

pub(crate) struct PartitionSolution {
    pub coefs: Vec<Array1<f64>>,
    pub objective: f64,
}

/// Block coordinate descent on precomputed segment Grams. `warm` seeds the
/// iteration; objectives decrease monotonically up to the tolerance.
pub(crate) fn solve_partition_grams(
    segs: &[SegmentGram],
    lambda: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&[Array1<f64>]>,
) -> Result<PartitionSolution> {
    let k = segs.len();
    let p = segs[0].xty.len();
    if lambda < 0.0 {
        return Err(Error::Config(format!("lambda must be nonnegative, got {lambda}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    if tol <= 0.0 || max_iter == 0 {
        return Err(Error::Config("tol must be positive and max_iter >= 1".into()));
    }

    let mut coefs: Vec<Array1<f64>> = match warm {
        Some(init) if init.len() == k && init.iter().all(|a| a.len() == p) => init.to_vec(),
        _ => vec![Array1::zeros(p); k],
    };
    if gamma.is_finite() {
        for a in coefs.iter_mut() {
            project_ball(a, gamma);
        }
    }
    // Dual residuals rho_k = g_k - G_k a_k, maintained across updates.
    let mut rho: Vec<Array1<f64>> = segs
        .iter()
        .zip(&coefs)
        .map(|(s, a)| &s.xty - &s.gram.dot(a))
        .collect();

    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut prev_obj = partition_objective(segs, &coefs, lambda);
    let mut result_obj = prev_obj;

    for _sweep in 0..max_iter {
        for i in 0..p {
            for (kk, (seg, a)) in segs.iter().zip(&coefs).enumerate() {
                let w = seg.len as f64;
                let gii = seg.gram[(i, i)];
                let b = rho[kk][i] + gii * a[i];
                c[kk] = b / w.sqrt();
                d[kk] = gii / w;
            }
            let new_block: Vec<f64> = if lambda == 0.0 {
                segs.iter()
                    .enumerate()
                    .map(|(kk, seg)| {
                        let gii = seg.gram[(i, i)];
                        if gii > 0.0 {
                            (rho[kk][i] + gii * coefs[kk][i]) / gii
                        } else {
                            0.0
                        }
                    })
                    .collect()
            } else {
                let u = group_prox_scaled(&c, &d, lambda);
                segs.iter()
                    .enumerate()
                    .map(|(kk, seg)| u[kk] / (seg.len as f64).sqrt())
                    .collect()
            };
            for (kk, seg) in segs.iter().enumerate() {
                let delta = new_block[kk] - coefs[kk][i];
                if delta != 0.0 {
                    rho[kk].scaled_add(-delta, &seg.gram.row(i));
                    coefs[kk][i] = new_block[kk];
                }
            }
        }

        if gamma.is_finite() {
            for (kk, seg) in segs.iter().enumerate() {
                if project_ball(&mut coefs[kk], gamma) {
                    rho[kk] = &seg.xty - &seg.gram.dot(&coefs[kk]);
                }
            }
        }

        let obj = partition_objective(segs, &coefs, lambda);
        if !obj.is_finite() {
            return Err(Error::Numeric("group lasso objective diverged".into()));
        }
        result_obj = obj;
        if prev_obj - obj < tol {
            break;
        }
        prev_obj = obj;
    }

    Ok(PartitionSolution {
        coefs,
        objective: result_obj,
    })
}

/// Projects onto the l2 ball of squared radius `gamma`; returns whether the
/// vector moved.
fn project_ball(a: &mut Array1<f64>, gamma: f64) -> bool {
    let sq: f64 = a.iter().map(|v| v * v).sum();
    if sq > gamma {
        let scale = (gamma / sq).sqrt();
        a.mapv_inplace(|v| v * scale);
        true
    } else {
        false
    }
}

/// Smallest `lambda` at which the all-zero solution is optimal:
/// `max_i 2 |(g_k(i) / sqrt(w_k))_k|_2`.
pub(crate) fn lambda_max_grams(segs: &[SegmentGram]) -> f64 {
    let p = segs[0].xty.len();
    (0..p)
        .map(|i| {
            let sq: f64 = segs
                .iter()
                .map(|s| {
                    let c = s.xty[i] / (s.len as f64).sqrt();
                    c * c
                })
                .sum();
            2.0 * sq.sqrt()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_returns_zero_inside_threshold() {
        let u = group_prox_scaled(&[0.4, -0.3], &[1.0, 2.0], 1.1);
        assert_eq!(u, vec![0.0, 0.0]);
    }

    #[test]
    fn prox_solves_stationarity() {
        let c = [3.0, -2.0, 0.5];
        let d = [1.5, 0.7, 2.0];
        let lambda = 1.3;
        let u = group_prox_scaled(&c, &d, lambda);
        let nu: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(nu > 0.0);
        for k in 0..3 {
            let grad = 2.0 * d[k] * u[k] - 2.0 * c[k] + lambda * u[k] / nu;
            assert!(grad.abs() < 1e-9, "stationarity violated: {grad}");
        }
    }

    #[test]
    fn prox_matches_scalar_soft_threshold() {
        // Single segment with unit curvature: u = sign(c) (|2c| - lambda) / 2.
        let u = group_prox_scaled(&[2.0], &[1.0], 1.0);
        assert!((u[0] - 1.5).abs() < 1e-12, "got {}", u[0]);
    }
}
