//! Greedy vector balancing and the herding-at-optimum order.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg;
use crate::quadratic::FiniteSumProblem;
use crate::shuffle::ShuffleStrategy;

const PRECONDITION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HerdingOrder {
    pub sigma: Vec<usize>,
    /// max_i ‖Σ_{j≤i} z_{σ(j)}‖.
    pub h_achieved: f64,
}

/// Largest prefix-sum norm of `vectors` visited in `order`.
pub fn prefix_bound(vectors: &[Vec<f64>], order: &[usize]) -> f64 {
    let d = vectors.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for &i in order {
        for (a, z) in acc.iter_mut().zip(&vectors[i]) {
            *a += z;
        }
        worst = worst.max(linalg::norm(&acc));
    }
    worst
}

/// Picks, at each step, the unused vector that minimizes the running
/// prefix-sum norm; ties go to the lowest index.
pub fn herding_order(vectors: &[Vec<f64>]) -> Result<HerdingOrder> {
    let n = vectors.len();
    let d = vectors.first().map_or(0, Vec::len);
    let mut total = vec![0.0; d];
    for (i, z) in vectors.iter().enumerate() {
        if z.len() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: z.len(),
            });
        }
        let norm = linalg::norm(z);
        if norm > 1.0 + PRECONDITION_TOL {
            return Err(LabError::Herding(format!(
                "vector {i} has norm {norm:e} > 1"
            )));
        }
        for (t, v) in total.iter_mut().zip(z) {
            *t += v;
        }
    }
    let sum_norm = linalg::norm(&total);
    if sum_norm > PRECONDITION_TOL {
        return Err(LabError::Herding(format!(
            "vectors sum to norm {sum_norm:e}, expected 0"
        )));
    }

    let mut used = vec![false; n];
    let mut acc = vec![0.0; d];
    let mut sigma = Vec::with_capacity(n);
    let mut h: f64 = 0.0;
    let mut trial = vec![0.0; d];
    for _ in 0..n {
        let mut best: Option<(usize, f64)> = None;
        for (i, z) in vectors.iter().enumerate() {
            if used[i] {
                continue;
            }
            for ((t, a), v) in trial.iter_mut().zip(&acc).zip(z) {
                *t = a + v;
            }
            let s = linalg::dot(&trial, &trial);
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
        let (i, s) = best.expect("an unused vector remains");
        used[i] = true;
        sigma.push(i);
        for (a, v) in acc.iter_mut().zip(&vectors[i]) {
            *a += v;
        }
        h = h.max(s.sqrt());
    }
    Ok(HerdingOrder {
        sigma,
        h_achieved: h,
    })
}

/// Herding order of ∇f_i(x*)/G*; identity when G* = 0.
///
/// With `use_initial_point`, uses ∇f_i(x0) − ∇F(x0) instead, which coincides
/// for identical-Hessian problems.
pub fn herding_at_opt_strategy(
    problem: &FiniteSumProblem,
    use_initial_point: Option<&[f64]>,
) -> Result<(ShuffleStrategy, HerdingOrder)> {
    let n = problem.n();
    let vectors: Vec<Vec<f64>> = match use_initial_point {
        None => problem
            .components()
            .iter()
            .map(|c| c.gradient(problem.minimizer()))
            .collect(),
        Some(x0) => {
            problem.check_dim(x0)?;
            let full = crate::quadratic::full_gradient(problem, x0)?;
            problem
                .components()
                .iter()
                .map(|c| linalg::sub(&c.gradient(x0), &full))
                .collect()
        }
    };
    let scale = vectors.iter().map(|v| linalg::norm(v)).fold(0.0, f64::max);
    if scale <= 1e-300 {
        let sigma: Vec<usize> = (0..n).collect();
        return Ok((
            ShuffleStrategy::HerdingAtOptimum {
                sigma: sigma.clone(),
            },
            HerdingOrder {
                sigma,
                h_achieved: 0.0,
            },
        ));
    }
    // Remove the rounding residue of Σ∇f_i(x*) = 0 before normalizing.
    let d = problem.dim();
    let mut mean = vec![0.0; d];
    for v in &vectors {
        for (m, a) in mean.iter_mut().zip(v) {
            *m += a / n as f64;
        }
    }
    let normalized: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| {
            v.iter()
                .zip(&mean)
                .map(|(a, m)| (a - m) / scale)
                .collect::<Vec<f64>>()
        })
        .map(|v: Vec<f64>| {
            let nv = linalg::norm(&v);
            if nv > 1.0 {
                v.into_iter().map(|a| a / nv).collect()
            } else {
                v
            }
        })
        .collect();
    let order = herding_order(&normalized)?;
    Ok((
        ShuffleStrategy::HerdingAtOptimum {
            sigma: order.sigma.clone(),
        },
        order,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_pair() {
        let o = herding_order(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(o.h_achieved, 1.0);
    }

    #[test]
    fn alternates_signs() {
        let z = vec![vec![1.0], vec![1.0], vec![-1.0], vec![-1.0]];
        let o = herding_order(&z).unwrap();
        assert_eq!(o.sigma, vec![0, 2, 1, 3]);
        assert_eq!(o.h_achieved, 1.0);
    }

    #[test]
    fn block_order_peaks_at_n() {
        let n = 6;
        let z: Vec<Vec<f64>> = (0..2 * n)
            .map(|i| vec![if i < n { 1.0 } else { -1.0 }])
            .collect();
        assert_eq!(herding_order(&z).unwrap().h_achieved, 1.0);
        assert_eq!(prefix_bound(&z, &(0..2 * n).collect::<Vec<_>>()), n as f64);
    }

    #[test]
    fn precondition_errors_name_the_problem() {
        let e = herding_order(&[vec![2.0], vec![-2.0]]).unwrap_err();
        assert!(e.to_string().contains("norm"));
        let e = herding_order(&[vec![1.0], vec![0.5]]).unwrap_err();
        assert!(e.to_string().contains("sum"));
    }
}
