//! Finite sums of quadratics `f_i(x) = ½xᵀA_i x + b_iᵀx + c_i`.
//!
//! Component indices are 0-based throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};

/// Relative tolerance for Hessian symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Gaps above this (negative) threshold are clamped to zero.
pub const GAP_CLAMP: f64 = -1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticComponent {
    pub hessian: Matrix,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

impl QuadraticComponent {
    pub fn new(hessian: Matrix, linear: Vec<f64>) -> Self {
        Self {
            hessian,
            linear,
            offset: 0.0,
        }
    }

    /// `a/2·x² + b·x` in one dimension.
    pub fn scalar(a: f64, b: f64) -> Self {
        Self::new(Matrix::scalar(a), vec![b])
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let ax = self.hessian.mul_vec(x);
        0.5 * linalg::dot(x, &ax) + linalg::dot(&self.linear, x) + self.offset
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.mul_vec(x);
        for (gi, bi) in g.iter_mut().zip(&self.linear) {
            *gi += bi;
        }
        g
    }

    /// Writes `A x + b` into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.hessian.mul_vec_into(x, out);
        for (gi, bi) in out.iter_mut().zip(&self.linear) {
            *gi += bi;
        }
    }
}

/// Position inside a run: epoch `k`, step `i` within the epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub epoch: usize,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSumProblem {
    components: Vec<QuadraticComponent>,
    mu: f64,
    ell: f64,
    kappa: f64,
    minimizer: Vec<f64>,
    grad_error_g: f64,
    grad_error_p: f64,
    grad_at_opt_gstar: f64,
    avg_hessian: Matrix,
    avg_linear: Vec<f64>,
    construction: Option<String>,
}

impl FiniteSumProblem {
    /// Builds a problem and measures every constant from the components.
    ///
    /// `mu` is the smallest eigenvalue of Ā, `ell` the largest component
    /// spectral norm, `(G, P)` the tightest pair with `G = G*`.
    pub fn new(components: Vec<QuadraticComponent>) -> Result<Self> {
        let first = components.first().ok_or(LabError::Empty)?;
        let d = first.dim();
        for (index, c) in components.iter().enumerate() {
            if c.dim() != d || c.hessian.dim() != d {
                return Err(LabError::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
            if !c.hessian.is_finite() || c.linear.iter().any(|v| !v.is_finite()) {
                return Err(LabError::NonFinite {
                    what: format!("component {index}"),
                });
            }
            if !c.hessian.is_symmetric(SYMMETRY_TOL) {
                return Err(LabError::NotSymmetric {
                    index,
                    asym: c.hessian.asymmetry(),
                });
            }
        }
        let (avg_hessian, avg_linear) = averages(&components);
        let minimizer = solve_minimizer(&components)?;
        let mu = linalg::sym_eigenvalues(&avg_hessian)[0];
        let ell = components
            .iter()
            .map(|c| spectral_radius(&c.hessian))
            .fold(0.0, f64::max);
        let mut problem = Self {
            components,
            mu,
            ell,
            kappa: ell / mu,
            minimizer,
            grad_error_g: 0.0,
            grad_error_p: 0.0,
            grad_at_opt_gstar: 0.0,
            avg_hessian,
            avg_linear,
            construction: None,
        };
        let gstar = problem.max_grad_norm_at_opt();
        problem.grad_at_opt_gstar = gstar;
        problem.grad_error_g = gstar;
        problem.grad_error_p = problem.min_valid_p();
        Ok(problem)
    }

    /// Declares `(mu, ell)`; rejects values inconsistent with the spectrum.
    pub fn with_constants(mut self, mu: f64, ell: f64) -> Result<Self> {
        let lam_min = linalg::sym_eigenvalues(&self.avg_hessian)[0];
        if !(mu > 0.0) || mu > lam_min * (1.0 + 1e-9) {
            return Err(LabError::Spec(format!(
                "declared mu = {mu:e} exceeds the smallest eigenvalue {lam_min:e} of the averaged Hessian"
            )));
        }
        let measured = self.max_component_norm();
        if ell < measured * (1.0 - 1e-9) {
            return Err(LabError::Spec(format!(
                "declared L = {ell:e} is below the largest component spectral norm {measured:e}"
            )));
        }
        self.mu = mu;
        self.ell = ell;
        self.kappa = ell / mu;
        Ok(self)
    }

    pub fn with_grad_error(mut self, g: f64, p: f64) -> Self {
        self.grad_error_g = g;
        self.grad_error_p = p;
        self
    }

    pub fn with_gstar(mut self, gstar: f64) -> Self {
        self.grad_at_opt_gstar = gstar;
        self
    }

    pub fn with_construction(mut self, id: impl Into<String>) -> Self {
        self.construction = Some(id.into());
        self
    }

    pub fn components(&self) -> &[QuadraticComponent] {
        &self.components
    }
    pub fn n(&self) -> usize {
        self.components.len()
    }
    pub fn dim(&self) -> usize {
        self.avg_linear.len()
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn ell(&self) -> f64 {
        self.ell
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }
    pub fn grad_error_g(&self) -> f64 {
        self.grad_error_g
    }
    pub fn grad_error_p(&self) -> f64 {
        self.grad_error_p
    }
    pub fn grad_at_opt_gstar(&self) -> f64 {
        self.grad_at_opt_gstar
    }
    pub fn avg_hessian(&self) -> &Matrix {
        &self.avg_hessian
    }
    pub fn avg_linear(&self) -> &[f64] {
        &self.avg_linear
    }
    pub fn construction(&self) -> Option<&str> {
        self.construction.as_deref()
    }

    pub fn max_component_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| spectral_radius(&c.hessian))
            .fold(0.0, f64::max)
    }

    /// max_i ‖∇f_i(x*)‖.
    pub fn max_grad_norm_at_opt(&self) -> f64 {
        self.components
            .iter()
            .map(|c| linalg::norm(&c.gradient(&self.minimizer)))
            .fold(0.0, f64::max)
    }

    /// Smallest P for which `‖∇f_i − ∇F‖ ≤ G + P‖∇F‖` holds with finite G:
    /// max_i ‖(A_i − Ā)Ā⁻¹‖₂.
    pub fn min_valid_p(&self) -> f64 {
        let inv = match inverse_spd(&self.avg_hessian) {
            Some(inv) => inv,
            None => return f64::INFINITY,
        };
        self.components
            .iter()
            .map(|c| linalg::spectral_norm(&c.hessian.sub(&self.avg_hessian).matmul(&inv)))
            .fold(0.0, f64::max)
    }

    /// True when every component Hessian equals Ā (to 1e-12 relative).
    pub fn identical_hessians(&self) -> bool {
        let scale = self.avg_hessian.max_abs().max(f64::MIN_POSITIVE);
        self.components
            .iter()
            .all(|c| c.hessian.sub(&self.avg_hessian).max_abs() <= 1e-12 * scale)
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let n = self.n() as f64;
        Ok(self.components.iter().map(|c| c.value(x)).sum::<f64>() / n)
    }
}

fn spectral_radius(m: &Matrix) -> f64 {
    let e = linalg::sym_eigenvalues(m);
    e.first()
        .map(|v| v.abs())
        .unwrap_or(0.0)
        .max(e.last().map(|v| v.abs()).unwrap_or(0.0))
}

fn averages(components: &[QuadraticComponent]) -> (Matrix, Vec<f64>) {
    let d = components[0].dim();
    let n = components.len() as f64;
    let mut a = Matrix::zeros(d);
    let mut b = vec![0.0; d];
    for c in components {
        a = a.add(&c.hessian);
        for (bi, ci) in b.iter_mut().zip(&c.linear) {
            *bi += ci;
        }
    }
    (a.scale(1.0 / n), b.into_iter().map(|v| v / n).collect())
}

fn inverse_spd(m: &Matrix) -> Option<Matrix> {
    let l = linalg::cholesky(m)?;
    let d = m.dim();
    let mut inv = Matrix::zeros(d);
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        let col = linalg::cholesky_solve(&l, &e);
        for i in 0..d {
            inv[(i, j)] = col[i];
        }
    }
    Some(inv)
}

/// ∇f_i(x) = A_i x + b_i.
pub fn component_gradient(problem: &FiniteSumProblem, i: usize, x: &[f64]) -> Result<Vec<f64>> {
    let c = problem.components.get(i).ok_or(LabError::IndexOutOfRange {
        index: i,
        n: problem.n(),
    })?;
    problem.check_dim(x)?;
    Ok(c.gradient(x))
}

/// ∇F(x) = Āx + b̄.
pub fn full_gradient(problem: &FiniteSumProblem, x: &[f64]) -> Result<Vec<f64>> {
    problem.check_dim(x)?;
    let mut g = problem.avg_hessian.mul_vec(x);
    for (gi, bi) in g.iter_mut().zip(&problem.avg_linear) {
        *gi += bi;
    }
    Ok(g)
}

/// Solves Āx = −b̄ by Cholesky.
pub fn solve_minimizer(components: &[QuadraticComponent]) -> Result<Vec<f64>> {
    if components.is_empty() {
        return Err(LabError::Empty);
    }
    let d = components[0].dim();
    if components
        .iter()
        .any(|c| c.dim() != d || c.hessian.dim() != d)
    {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: 0,
        });
    }
    let (a, b) = averages(components);
    let min_eig = linalg::sym_eigenvalues(&a).first().copied().unwrap_or(0.0);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    if !(min_eig > 1e-14 * scale) {
        return Err(LabError::NotStronglyConvex { min_eig });
    }
    let l = linalg::cholesky(&a).ok_or(LabError::NotStronglyConvex { min_eig })?;
    let rhs: Vec<f64> = b.iter().map(|v| -v).collect();
    Ok(linalg::cholesky_solve(&l, &rhs))
}

/// F(x) − F(x*) evaluated as ½(x−x*)ᵀĀ(x−x*), clamped at zero.
pub fn optimality_gap(problem: &FiniteSumProblem, x: &[f64]) -> Result<f64> {
    problem.check_dim(x)?;
    Ok(gap_unchecked(problem, x))
}

pub(crate) fn gap_unchecked(problem: &FiniteSumProblem, x: &[f64]) -> f64 {
    let e = linalg::sub(x, &problem.minimizer);
    let ae = problem.avg_hessian.mul_vec(&e);
    let gap = 0.5 * linalg::dot(&e, &ae);
    if gap < 0.0 && gap >= GAP_CLAMP {
        0.0
    } else {
        gap.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_problem(parts: &[(f64, f64)]) -> FiniteSumProblem {
        FiniteSumProblem::new(
            parts
                .iter()
                .map(|&(a, b)| QuadraticComponent::scalar(a, b))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gradient_of_half_square() {
        let p = scalar_problem(&[(1.0, 0.0)]);
        assert_eq!(component_gradient(&p, 0, &[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn gradient_of_shifted_component() {
        let p = scalar_problem(&[(2.0, 1.0), (2.0, -1.0)]);
        assert_eq!(component_gradient(&p, 0, &[0.0]).unwrap(), vec![1.0]);
        assert_eq!(full_gradient(&p, &[1.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn index_and_dimension_errors() {
        let p = scalar_problem(&[(1.0, 0.0)]);
        assert!(matches!(
            component_gradient(&p, 1, &[0.0]),
            Err(LabError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            full_gradient(&p, &[0.0, 1.0]),
            Err(LabError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minimizer_of_completed_square() {
        let p = scalar_problem(&[(1.0, -3.0)]);
        assert!((p.minimizer()[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_average_is_rejected() {
        let comps = vec![
            QuadraticComponent::scalar(-1.0, 0.0),
            QuadraticComponent::scalar(0.5, 0.0),
        ];
        assert!(matches!(
            solve_minimizer(&comps),
            Err(LabError::NotStronglyConvex { .. })
        ));
    }

    #[test]
    fn gap_of_half_square() {
        let p = scalar_problem(&[(1.0, 0.0)]);
        assert_eq!(optimality_gap(&p, &[2.0]).unwrap(), 2.0);
        assert_eq!(optimality_gap(&p, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn identical_hessian_pair_has_zero_p() {
        let p = scalar_problem(&[(2.0, 1.0), (2.0, -1.0)]);
        assert!(p.identical_hessians());
        assert_eq!(p.min_valid_p(), 0.0);
        assert_eq!(p.grad_at_opt_gstar(), 1.0);
    }

    #[test]
    fn declared_mu_above_spectrum_is_rejected() {
        let p = scalar_problem(&[(2.0, 0.0)]);
        assert!(p.clone().with_constants(3.0, 2.0).is_err());
        assert!(p.clone().with_constants(1.0, 1.0).is_err());
        let q = p.with_constants(1.0, 4.0).unwrap();
        assert_eq!(q.kappa(), 4.0);
    }
}
