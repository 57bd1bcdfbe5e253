//! Measured constants and pass/fail checks for the standing assumptions:
//! strong convexity of F, component smoothness, bounded gradient error
//! `‖∇f_i(x) − ∇F(x)‖ ≤ G + P‖∇F(x)‖`, and bounded gradients at x*.
//!
//! The gradient-error check is exact for quadratics. With `y = ∇F(x)` the
//! error is `M_i y + r_i` where `M_i = (A_i − Ā)Ā⁻¹` and `r_i = ∇f_i(x*)`,
//! so the bound holds on all of ℝᵈ iff `P ≥ ‖M_i‖₂` and `G ≥ ‖r_i‖` for all
//! i. A deterministic Halton probe set is evaluated as well so the finite
//! sample surrogate is reported next to the analytic verdict.

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::quadratic::FiniteSumProblem;

pub const DEFAULT_PROBE_COUNT: usize = 1024;
const REL_TOL: f64 = 1e-9;
const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
/// Fixed offset into the Halton sequence (skips the origin-heavy prefix).
const HALTON_SKIP: u64 = 409;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub offending_component: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub count: usize,
    pub radius: f64,
    /// Largest `lhs − rhs` seen over probes and components (≤ 0 means no violation).
    pub worst_excess: f64,
    pub worst_component: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub mu_measured: f64,
    pub ell_measured: f64,
    pub kappa_measured: f64,
    pub gstar_measured: f64,
    /// Smallest P admitting a finite G.
    pub p_measured: f64,
    /// Smallest G valid together with `p_measured` (equals `gstar_measured`).
    pub g_measured: f64,
    pub identical_hessians: bool,
    pub components_strongly_convex: bool,
    pub checks: Vec<AssumptionCheck>,
    pub probe: ProbeSummary,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Debug, Default)]
pub struct AuditOptions {
    /// Probe radius is 10‖x* − x0‖ when given, else 10·max(1, ‖x*‖).
    pub x0: Option<Vec<f64>>,
    pub probe_count: Option<usize>,
}

pub const CHECK_STRONG_CONVEXITY: &str = "strong-convexity";
pub const CHECK_SMOOTHNESS: &str = "component-smoothness";
pub const CHECK_GRAD_ERROR: &str = "bounded-gradient-error";
pub const CHECK_GRAD_AT_OPT: &str = "bounded-gradient-at-optimum";

pub fn audit_assumptions(problem: &FiniteSumProblem) -> AuditReport {
    audit_assumptions_with(problem, &AuditOptions::default())
}

pub fn audit_assumptions_with(problem: &FiniteSumProblem, opts: &AuditOptions) -> AuditReport {
    let eig_avg = linalg::sym_eigenvalues(problem.avg_hessian());
    let mu_measured = eig_avg[0];
    let ell_measured = problem.max_component_norm();
    let gstar_measured = problem.max_grad_norm_at_opt();
    let p_measured = problem.min_valid_p();
    let mut checks = Vec::new();

    checks.push(AssumptionCheck {
        name: CHECK_STRONG_CONVEXITY.into(),
        pass: problem.mu() > 0.0 && mu_measured >= problem.mu() * (1.0 - REL_TOL),
        detail: format!(
            "declared mu = {:e}, smallest eigenvalue of average = {:e}",
            problem.mu(),
            mu_measured
        ),
        offending_component: None,
    });

    let mut worst_smooth: Option<(usize, f64)> = None;
    let mut min_component_eig = f64::INFINITY;
    for (i, c) in problem.components().iter().enumerate() {
        let e = linalg::sym_eigenvalues(&c.hessian);
        let radius = e[0].abs().max(e[e.len() - 1].abs());
        min_component_eig = min_component_eig.min(e[0]);
        if radius > problem.ell() * (1.0 + REL_TOL) && worst_smooth.is_none_or(|(_, r)| radius > r)
        {
            worst_smooth = Some((i, radius));
        }
    }
    checks.push(AssumptionCheck {
        name: CHECK_SMOOTHNESS.into(),
        pass: worst_smooth.is_none(),
        detail: match worst_smooth {
            None => format!(
                "declared L = {:e}, largest component norm = {:e}",
                problem.ell(),
                ell_measured
            ),
            Some((i, r)) => format!(
                "component {i} has spectral norm {r:e} > L = {:e}",
                problem.ell()
            ),
        },
        offending_component: worst_smooth.map(|(i, _)| i),
    });

    let (grad_check, probe) = gradient_error_check(problem, opts);
    checks.push(grad_check);

    let mut worst_opt: Option<(usize, f64)> = None;
    for (i, c) in problem.components().iter().enumerate() {
        let g = linalg::norm(&c.gradient(problem.minimizer()));
        if g > problem.grad_at_opt_gstar() * (1.0 + REL_TOL) + 1e-12
            && worst_opt.is_none_or(|(_, w)| g > w)
        {
            worst_opt = Some((i, g));
        }
    }
    checks.push(AssumptionCheck {
        name: CHECK_GRAD_AT_OPT.into(),
        pass: worst_opt.is_none(),
        detail: match worst_opt {
            None => format!(
                "declared G* = {:e}, measured = {:e}",
                problem.grad_at_opt_gstar(),
                gstar_measured
            ),
            Some((i, g)) => format!(
                "component {i} has ‖∇f_i(x*)‖ = {g:e} > G* = {:e}",
                problem.grad_at_opt_gstar()
            ),
        },
        offending_component: worst_opt.map(|(i, _)| i),
    });

    AuditReport {
        mu_measured,
        ell_measured,
        kappa_measured: ell_measured / mu_measured,
        gstar_measured,
        p_measured,
        g_measured: gstar_measured,
        identical_hessians: problem.identical_hessians(),
        components_strongly_convex: min_component_eig >= problem.mu() * (1.0 - REL_TOL),
        checks,
        probe,
    }
}

fn gradient_error_check(
    problem: &FiniteSumProblem,
    opts: &AuditOptions,
) -> (AssumptionCheck, ProbeSummary) {
    let g = problem.grad_error_g();
    let p = problem.grad_error_p();
    let x_star = problem.minimizer();
    let avg_a = problem.avg_hessian();
    let avg_b = problem.avg_linear();

    // Analytic verdict.
    let inv = inverse(avg_a);
    let mut analytic_fail: Option<(usize, String)> = None;
    for (i, c) in problem.components().iter().enumerate() {
        let m_norm = linalg::spectral_norm(&c.hessian.sub(avg_a).matmul(&inv));
        let r_norm = linalg::norm(&c.gradient(x_star));
        if m_norm > p * (1.0 + REL_TOL) + 1e-12 {
            analytic_fail = Some((
                i,
                format!("component {i} needs P ≥ {m_norm:e} but P = {p:e}"),
            ));
            break;
        }
        if r_norm > g * (1.0 + REL_TOL) + 1e-12 {
            analytic_fail = Some((
                i,
                format!("component {i} needs G ≥ {r_norm:e} but G = {g:e}"),
            ));
            break;
        }
    }

    // Probe surrogate.
    let d = problem.dim();
    let radius = match &opts.x0 {
        Some(x0) => {
            let dist = linalg::norm(&linalg::sub(x_star, x0));
            10.0 * if dist > 0.0 { dist } else { 1.0 }
        }
        None => 10.0 * linalg::norm(x_star).max(1.0),
    };
    let count = opts.probe_count.unwrap_or(DEFAULT_PROBE_COUNT);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_component = None;
    let mut points = probe_points(d, count, radius);
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = radius;
        points.push(e.clone());
        e[j] = -radius;
        points.push(e);
    }
    let mut diff = vec![0.0; d];
    for offset in &points {
        let x: Vec<f64> = x_star.iter().zip(offset).map(|(a, b)| a + b).collect();
        let mut grad_f = avg_a.mul_vec(&x);
        for (gi, bi) in grad_f.iter_mut().zip(avg_b) {
            *gi += bi;
        }
        let rhs = g + p * linalg::norm(&grad_f);
        for (i, c) in problem.components().iter().enumerate() {
            c.gradient_into(&x, &mut diff);
            for (di, gi) in diff.iter_mut().zip(&grad_f) {
                *di -= gi;
            }
            let excess = linalg::norm(&diff) - rhs * (1.0 + REL_TOL) - 1e-12;
            if excess > worst_excess {
                worst_excess = excess;
                worst_component = Some(i);
            }
        }
    }
    let probe_fail = worst_excess > 0.0;
    let pass = analytic_fail.is_none() && !probe_fail;
    let detail = match (&analytic_fail, probe_fail) {
        (Some((_, msg)), _) => msg.clone(),
        (None, true) => {
            format!("probe violation {worst_excess:e} at component {worst_component:?}")
        }
        (None, false) => format!(
            "G = {g:e}, P = {p:e} hold analytically and on {} probes",
            points.len()
        ),
    };
    let offending_component =
        analytic_fail
            .map(|(i, _)| i)
            .or(if probe_fail { worst_component } else { None });
    (
        AssumptionCheck {
            name: CHECK_GRAD_ERROR.into(),
            pass,
            detail,
            offending_component,
        },
        ProbeSummary {
            count: points.len(),
            radius,
            worst_excess,
            worst_component,
        },
    )
}

fn inverse(m: &linalg::Matrix) -> linalg::Matrix {
    let d = m.dim();
    let mut inv = linalg::Matrix::zeros(d);
    if let Some(l) = linalg::cholesky(m) {
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let col = linalg::cholesky_solve(&l, &e);
            for i in 0..d {
                inv[(i, j)] = col[i];
            }
        }
    }
    inv
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Halton points mapped from the cube [−1, 1]ᵈ radially onto the ball of `radius`.
pub fn probe_points(d: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    (0..count as u64)
        .map(|j| {
            let v: Vec<f64> = (0..d)
                .map(|k| 2.0 * radical_inverse(j + HALTON_SKIP, PRIMES[k % PRIMES.len()]) - 1.0)
                .collect();
            let inf = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            let two = linalg::norm(&v);
            let s = if two > 0.0 { radius * inf / two } else { 0.0 };
            v.into_iter().map(|a| a * s).collect()
        })
        .collect()
}
