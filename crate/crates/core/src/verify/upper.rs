use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BoundCheckReport, BoundKind, EtaRow, NamedConstant, REPORT_SCHEMA};
use crate::audit::{
    audit_assumptions_with, AuditOptions, AuditReport, CHECK_GRAD_AT_OPT, CHECK_GRAD_ERROR,
    CHECK_SMOOTHNESS, CHECK_STRONG_CONVEXITY,
};
use crate::error::{LabError, Result};
use crate::linalg;
use crate::quadratic::{optimality_gap, FiniteSumProblem};
use crate::schedule::{log_argument, log_term, recommended_step_size, StepParams, TheoremId};
use crate::shuffle::{distance_to_opt, run, RunConfig, ShuffleStrategy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperParams {
    pub epochs: usize,
    pub x0: Vec<f64>,
    /// Replaces the prescribed schedule when set; the assumptions on η are
    /// still checked.
    pub eta: Option<f64>,
}

impl UpperParams {
    pub fn new(epochs: usize, x0: Vec<f64>) -> Self {
        Self {
            epochs,
            x0,
            eta: None,
        }
    }
}

fn refuse(theorem: TheoremId, reason: impl Into<String>) -> LabError {
    LabError::AssumptionRefused {
        theorem: theorem.to_string(),
        reason: reason.into(),
    }
}

fn require_check(theorem: TheoremId, audit: &AuditReport, name: &str) -> Result<()> {
    match audit.check(name) {
        Some(c) if c.pass => Ok(()),
        Some(c) => Err(refuse(theorem, format!("{name}: {}", c.detail))),
        None => Err(refuse(theorem, format!("{name}: not audited"))),
    }
}

/// Max prefix norm ‖Σ_{j≤i} ∇f_{σ(j)}(x*)‖ divided by G*.
fn prefix_ratio(problem: &FiniteSumProblem, sigma: &[usize]) -> f64 {
    let gstar = problem.grad_at_opt_gstar();
    if gstar == 0.0 {
        return 0.0;
    }
    let mut acc = vec![0.0; problem.dim()];
    let mut worst: f64 = 0.0;
    for &i in sigma {
        let g = problem.components()[i].gradient(problem.minimizer());
        for (a, b) in acc.iter_mut().zip(&g) {
            *a += b;
        }
        worst = worst.max(linalg::norm(&acc));
    }
    worst / gstar
}

fn fixed_order(problem: &FiniteSumProblem, strategy: &ShuffleStrategy) -> Option<Vec<usize>> {
    match strategy {
        ShuffleStrategy::Igd => Some((0..problem.n()).collect()),
        ShuffleStrategy::FixedPermutation { sigma }
        | ShuffleStrategy::HerdingAtOptimum { sigma } => Some(sigma.clone()),
        _ => None,
    }
}

/// Inputs to the schedule of `theorem` on this problem and start: G for the
/// generalized-gradient schedule and G* otherwise, F(x0) − F* or ‖x0 − x*‖
/// accordingly, and the prefix ratio of the fixed order for herding.
pub fn schedule_params(
    theorem: TheoremId,
    problem: &FiniteSumProblem,
    strategy: &ShuffleStrategy,
    epochs: usize,
    x0: &[f64],
) -> Result<StepParams> {
    problem.check_dim(x0)?;
    let generalized = theorem == TheoremId::LargeUbGeneralizedGrad;
    let h = if theorem == TheoremId::HerdingAtOpt {
        let sigma = fixed_order(problem, strategy).ok_or_else(|| {
            refuse(
                theorem,
                format!(
                    "fixed-permutation: strategy `{}` changes the order between epochs",
                    strategy.label()
                ),
            )
        })?;
        strategy.validate(problem.n())?;
        prefix_ratio(problem, &sigma)
    } else {
        0.0
    };
    Ok(StepParams {
        mu: problem.mu(),
        ell: problem.ell(),
        n: problem.n(),
        epochs,
        g: if generalized {
            problem.grad_error_g()
        } else {
            problem.grad_at_opt_gstar()
        },
        scale: if generalized {
            optimality_gap(problem, x0)?
        } else {
            distance_to_opt(problem, x0)
        },
        h,
    })
}

/// Runs the prescribed schedule and checks the measured quantity against
/// the bound assembled from the explicit constants of each proof:
///
/// * `small-ub-idhess`: gap ≤ 4ηnG*² + 5G*²/(2L), η < 1/L, 1-D, identical Hessians.
/// * `small-ub-scvx`: ‖x − x*‖² ≤ e^{−ημnK}‖x0 − x*‖² + η²Ln²G*²/μ, η ≤ 1/L.
/// * `herding-at-opt`: ‖x − x*‖² ≤ e^{−ημnK}‖x0 − x*‖² + H²η²LG*²/μ, η ≤ 1/L,
///   with H the prefix ratio achieved by the fixed order.
/// * `large-ub-generalizedgrad`: gap ≤ e^{−ημnK/2}(F(x0) − F*) + 4η²n²L²G²/μ,
///   ηnL ≤ ¼·min{1, 1/P}.
///
/// `large-ub-avg` has no explicit constants and is refused.
pub fn upper_bound_check(
    theorem: TheoremId,
    problem: &FiniteSumProblem,
    strategy: &ShuffleStrategy,
    params: &UpperParams,
) -> Result<BoundCheckReport> {
    if theorem.is_lower_bound() {
        return Err(LabError::Spec(format!(
            "{theorem} is a lower-bound theorem; use lower_bound_check"
        )));
    }
    if theorem == TheoremId::LargeUbAvg {
        return Err(refuse(theorem, "explicit-constants: the bound is stated only up to unspecified constants, so no sharp check exists"));
    }
    problem.check_dim(&params.x0)?;
    strategy.validate(problem.n())?;
    let audit = audit_assumptions_with(
        problem,
        &AuditOptions {
            x0: Some(params.x0.clone()),
            probe_count: None,
        },
    );
    require_check(theorem, &audit, CHECK_STRONG_CONVEXITY)?;
    require_check(theorem, &audit, CHECK_SMOOTHNESS)?;
    if !strategy.is_permutation_based() {
        return Err(refuse(
            theorem,
            format!(
                "permutation-based: strategy `{}` samples with replacement",
                strategy.label()
            ),
        ));
    }

    let (mu, ell, n, k) = (
        problem.mu(),
        problem.ell(),
        problem.n() as f64,
        params.epochs as f64,
    );
    let kappa = ell / mu;
    let dist0 = distance_to_opt(problem, &params.x0);
    let delta0 = optimality_gap(problem, &params.x0)?;
    let gstar = problem.grad_at_opt_gstar();
    let (g, p) = (problem.grad_error_g(), problem.grad_error_p());

    match theorem {
        TheoremId::SmallUbIdhess => {
            if problem.dim() != 1 {
                return Err(refuse(
                    theorem,
                    format!("one-dimensional: problem has dimension {}", problem.dim()),
                ));
            }
            if !audit.identical_hessians {
                return Err(refuse(
                    theorem,
                    "identical-hessians: component Hessians differ",
                ));
            }
            require_check(theorem, &audit, CHECK_GRAD_AT_OPT)?;
        }
        TheoremId::SmallUbScvx | TheoremId::HerdingAtOpt => {
            if !audit.components_strongly_convex {
                return Err(refuse(
                    theorem,
                    "component-strong-convexity: some component has a Hessian eigenvalue below mu",
                ));
            }
            require_check(theorem, &audit, CHECK_GRAD_AT_OPT)?;
            if theorem == TheoremId::HerdingAtOpt && fixed_order(problem, strategy).is_none() {
                return Err(refuse(
                    theorem,
                    format!(
                        "fixed-permutation: strategy `{}` changes the order between epochs",
                        strategy.label()
                    ),
                ));
            }
        }
        TheoremId::LargeUbGeneralizedGrad => require_check(theorem, &audit, CHECK_GRAD_ERROR)?,
        _ => unreachable!("lower bounds and large-ub-avg handled above"),
    }

    let step = schedule_params(theorem, problem, strategy, params.epochs, &params.x0)?;
    let h = step.h;
    let log_factor = log_term(log_argument(theorem, &step).unwrap_or(1.0));
    let eta = match params.eta {
        Some(e) => e,
        None => recommended_step_size(theorem, &step)?,
    };

    match theorem {
        TheoremId::SmallUbIdhess if eta * ell >= 1.0 => {
            return Err(refuse(
                theorem,
                format!("step-size: η = {eta:e} ≥ 1/L = {:e}; the schedule needs K > κ·max{{log, 1}}/n = {:e}", 1.0 / ell, kappa * log_factor / n),
            ))
        }
        TheoremId::SmallUbScvx | TheoremId::HerdingAtOpt if eta * ell > 1.0 => {
            return Err(refuse(
                theorem,
                format!("step-size: η = {eta:e} > 1/L = {:e}; the schedule needs K ≥ 2κ·max{{log, 1}}/n = {:e}", 1.0 / ell, 2.0 * kappa * log_factor / n),
            ))
        }
        TheoremId::LargeUbGeneralizedGrad if eta * n * ell > 0.25 * (1.0f64).min(1.0 / p) => {
            return Err(refuse(
                theorem,
                format!(
                    "step-size: ηnL = {:e} > ¼·min{{1, 1/P}} with P = {p:e}; the schedule needs K ≥ 8κ·max{{1, P}}·max{{log, 1}} = {:e}",
                    eta * n * ell,
                    8.0 * kappa * p.max(1.0) * log_factor
                ),
            ))
        }
        _ => {}
    }

    let rec = run(
        problem,
        strategy,
        &RunConfig::new(eta, params.epochs, params.x0.clone()),
    )?;
    let final_gap = rec.final_gap();
    let dist2 = distance_to_opt(problem, &rec.final_iterate).powi(2);

    let mut constants = Vec::new();
    let mut push = |name: &str, value: f64, derivation: &str| {
        constants.push(NamedConstant {
            name: name.into(),
            value,
            derivation: derivation.into(),
        });
    };
    let (metric, measured, bound) = match theorem {
        TheoremId::SmallUbIdhess => {
            let iter_term = 4.0 * eta * n * gstar * gstar;
            let smooth_term = 5.0 * gstar * gstar / (2.0 * ell);
            push(
                "iterate_term",
                iter_term,
                "4ηnG*², equal to (4G*²/(μK))·max{log(L|x0 − x*|/G*), 1} on the schedule",
            );
            push(
                "smoothness_term",
                smooth_term,
                "5G*²/(2L) from one smoothness step of length G*/L",
            );
            ("final-gap", final_gap, iter_term + smooth_term)
        }
        TheoremId::SmallUbScvx => {
            let contraction = (-eta * mu * n * k).exp() * dist0 * dist0;
            let noise = eta * eta * ell * n * n * gstar * gstar / mu;
            push("contraction_term", contraction, "e^{−ημnK}‖x0 − x*‖²");
            push(
                "noise_term",
                noise,
                "η²Ln²G*²/μ from prefix sums bounded by nG*",
            );
            ("squared-distance", dist2, contraction + noise)
        }
        TheoremId::HerdingAtOpt => {
            let contraction = (-eta * mu * n * k).exp() * dist0 * dist0;
            let noise = h * h * eta * eta * ell * gstar * gstar / mu;
            push("contraction_term", contraction, "e^{−ημnK}‖x0 − x*‖²");
            push(
                "noise_term",
                noise,
                "H²η²LG*²/μ from prefix sums bounded by HG*",
            );
            push("H_achieved", h, "max prefix norm of ∇f_σ(j)(x*) over G*");
            ("squared-distance", dist2, contraction + noise)
        }
        TheoremId::LargeUbGeneralizedGrad => {
            let contraction = (-eta * mu * n * k / 2.0).exp() * delta0;
            let noise = 4.0 * eta * eta * n * n * ell * ell * g * g / mu;
            push(
                "contraction_term",
                contraction,
                "e^{−ημnK/2}(F(x0) − F*) from the (1 − ηnμ/2) epoch recursion",
            );
            push(
                "noise_term",
                noise,
                "4η²n²L²G²/μ, the geometric sum of 2η³n³L²G²",
            );
            ("final-gap", final_gap, contraction + noise)
        }
        _ => unreachable!(),
    };
    push(
        "log_factor",
        log_factor,
        "max{log(argument), 1} of the schedule",
    );

    let margin = BoundCheckReport::margin_for(BoundKind::Upper, measured, bound);
    let mut params_map = BTreeMap::new();
    for (key, v) in [
        ("n", n),
        ("d", problem.dim() as f64),
        ("mu", mu),
        ("L", ell),
        ("kappa", kappa),
        ("K", k),
        ("eta", eta),
        ("G_star", gstar),
        ("G", g),
        ("P", p),
        ("H", h),
        ("x0_distance", dist0),
        ("initial_gap", delta0),
        ("final_gap", final_gap),
        ("final_squared_distance", dist2),
    ] {
        params_map.insert(key.to_string(), v);
    }
    let mut notes = Vec::new();
    if metric == "squared-distance" {
        params_map.insert("gap_bound".into(), ell / 2.0 * bound);
        notes.push("gap ≤ L/2·‖x − x*‖², so gap_bound = L/2·analytic_bound".into());
    }
    if rec.diverged.is_some() {
        notes.push("run diverged".into());
    }
    Ok(BoundCheckReport {
        schema: REPORT_SCHEMA.into(),
        theorem_id: theorem,
        kind: BoundKind::Upper,
        metric: metric.into(),
        params: params_map,
        measured_inf_gap: measured,
        analytic_bound: bound,
        margin,
        pass: margin >= 1.0 && rec.diverged.is_none(),
        per_eta_table: vec![EtaRow {
            eta,
            gap: measured,
            diverged: rec.diverged.is_some(),
            regime: None,
        }],
        regimes: Vec::new(),
        constants,
        notes,
    })
}
