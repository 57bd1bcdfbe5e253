//! Adversarial IGD instances: one low-dimensional block per step-size
//! regime, direct-summed into a single problem that defeats every constant
//! step size.

mod large;
mod polygon;
mod small;

pub use large::{build_large_lb_concave, build_large_lb_idhess, large_concave_block};
pub use polygon::{compute_u0_v0, U0V0};
pub use small::{
    build_small_lb_concave, build_small_lb_idhess, build_small_lb_sc, concave_block, rotated_block,
};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::Matrix;
use crate::quadratic::{FiniteSumProblem, QuadraticComponent};
use crate::schedule::TheoremId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSpec {
    pub theorem: TheoremId,
    pub n: usize,
    pub kappa: f64,
    #[serde(rename = "K")]
    pub epochs: usize,
    #[serde(rename = "G")]
    pub g: f64,
    pub mu: f64,
    /// First coordinate of x0 for the concave small-epoch instance.
    #[serde(rename = "D")]
    pub d: Option<f64>,
}

impl ConstructionSpec {
    pub fn new(theorem: TheoremId, n: usize, kappa: f64, epochs: usize, g: f64, mu: f64) -> Self {
        Self {
            theorem,
            n,
            kappa,
            epochs,
            g,
            mu,
            d: None,
        }
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = Some(d);
        self
    }

    /// L = κμ.
    pub fn ell(&self) -> f64 {
        self.kappa * self.mu
    }

    pub(crate) fn k(&self) -> f64 {
        self.epochs as f64
    }

    pub(crate) fn nf(&self) -> f64 {
        self.n as f64
    }

    /// 1/(μnK), the small/moderate step-size boundary.
    pub fn eta_moderate(&self) -> f64 {
        1.0 / (self.mu * self.nf() * self.k())
    }

    pub(crate) fn check_common(&self) -> Result<()> {
        let finite = self.kappa.is_finite() && self.g.is_finite() && self.mu.is_finite();
        if !finite || !(self.mu > 0.0) || !(self.g > 0.0) {
            return Err(LabError::Spec(
                "mu and G must be positive and finite".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(LabError::Spec("K ≥ 1 violated".into()));
        }
        Ok(())
    }

    pub(crate) fn require(&self, ok: bool, inequality: impl Into<String>) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(LabError::Spec(format!(
                "{} violated (n = {}, kappa = {}, K = {})",
                inequality.into(),
                self.n,
                self.kappa,
                self.epochs
            )))
        }
    }
}

/// A step-size interval and the gap lower bound that one block guarantees on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeInterval {
    pub lo: f64,
    /// `f64::INFINITY` for the last interval (serialized as null).
    #[serde(with = "crate::io::infinity_as_null")]
    pub hi: f64,
    pub label: String,
    /// Index into `ConstructionBundle::per_dimension`.
    pub block: usize,
    pub gap_lower_bound: f64,
    /// How the bound is assembled, with its explicit constant.
    pub derivation: String,
}

impl RegimeInterval {
    pub fn contains(&self, eta: f64) -> bool {
        eta >= self.lo && eta < self.hi
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionBlock {
    pub label: String,
    pub problem: FiniteSumProblem,
    pub x0: Vec<f64>,
    /// First coordinate of this block in the aggregate.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionBundle {
    pub spec: ConstructionSpec,
    pub problem: FiniteSumProblem,
    pub x0: Vec<f64>,
    pub per_dimension: Vec<DimensionBlock>,
    /// Sorted, disjoint, covering (0, ∞).
    pub regimes: Vec<RegimeInterval>,
    pub analytic_lower_bound: f64,
    /// Named constants used by the regime bounds.
    pub constants: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl ConstructionBundle {
    pub fn regime_for(&self, eta: f64) -> Option<&RegimeInterval> {
        self.regimes.iter().find(|r| r.contains(eta))
    }
}

/// Builds the bundle for any lower-bound theorem.
pub fn build(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    match spec.theorem {
        TheoremId::SmallLbIdhess => build_small_lb_idhess(spec),
        TheoremId::SmallLbSc => build_small_lb_sc(spec),
        TheoremId::SmallLbConcave => build_small_lb_concave(spec),
        TheoremId::LargeLbIdhess => build_large_lb_idhess(spec),
        TheoremId::LargeLbConcave => build_large_lb_concave(spec),
        other => Err(LabError::Spec(format!(
            "{other} is not a lower-bound construction"
        ))),
    }
}

/// Block-diagonal direct sum; x0 is the concatenation.
pub fn aggregate_dimensions(
    blocks: &[(&FiniteSumProblem, &[f64])],
) -> Result<(FiniteSumProblem, Vec<f64>)> {
    let n = blocks.first().ok_or(LabError::Empty)?.0.n();
    for (p, x0) in blocks {
        if p.n() != n {
            return Err(LabError::Spec(format!(
                "all blocks must share n: {} vs {}",
                p.n(),
                n
            )));
        }
        p.check_dim(x0)?;
    }
    let components = (0..n)
        .map(|i| {
            let hs: Vec<&Matrix> = blocks
                .iter()
                .map(|(p, _)| &p.components()[i].hessian)
                .collect();
            let linear = blocks
                .iter()
                .flat_map(|(p, _)| p.components()[i].linear.iter().copied())
                .collect();
            let offset = blocks.iter().map(|(p, _)| p.components()[i].offset).sum();
            QuadraticComponent {
                hessian: Matrix::block_diag(&hs),
                linear,
                offset,
            }
        })
        .collect();
    let x0 = blocks.iter().flat_map(|(_, x)| x.iter().copied()).collect();
    Ok((FiniteSumProblem::new(components)?, x0))
}

/// (1 − 1/m)^m ≥ 1/4 for m ≥ 2: lower bound on the contraction of the
/// μ-block over nK steps with ημ < 1/(nK).
pub(crate) const SMALL_STEP_FACTOR: f64 = 0.25;

pub fn scalar_block(a: f64, linear: impl Fn(usize) -> f64, n: usize) -> Result<FiniteSumProblem> {
    FiniteSumProblem::new(
        (0..n)
            .map(|i| QuadraticComponent::scalar(a, linear(i)))
            .collect(),
    )
}

/// ±G split (even n) or the three-type split with one offset-free component
/// first (odd n), all sharing curvature `a`.
pub fn pm_block(a: f64, g: f64, n: usize) -> Result<FiniteSumProblem> {
    if n % 2 == 0 {
        scalar_block(a, |i| if i < n / 2 { g } else { -g }, n)
    } else {
        scalar_block(
            a,
            |i| {
                if i == 0 {
                    0.0
                } else if i <= (n - 1) / 2 {
                    g
                } else {
                    -g
                }
            },
            n,
        )
    }
}

pub(crate) struct RegimeDraft {
    pub lo: f64,
    pub hi: f64,
    pub label: &'static str,
    pub block: usize,
    pub gap_lower_bound: f64,
    pub derivation: String,
}

pub(crate) fn finish(
    spec: &ConstructionSpec,
    blocks: Vec<(String, FiniteSumProblem, Vec<f64>)>,
    drafts: Vec<RegimeDraft>,
    constants: Vec<(String, f64)>,
    mut notes: Vec<String>,
) -> Result<ConstructionBundle> {
    let refs: Vec<(&FiniteSumProblem, &[f64])> =
        blocks.iter().map(|(_, p, x)| (p, x.as_slice())).collect();
    let (raw, x0) = aggregate_dimensions(&refs)?;
    let ell = spec.ell();
    let lam_min = raw.mu();
    let mu_eff = if lam_min >= spec.mu * (1.0 - 1e-12) {
        spec.mu
    } else {
        lam_min
    };
    if mu_eff < spec.mu {
        notes.push(format!(
            "averaged Hessian has smallest eigenvalue {lam_min:e} < requested mu = {:e}; the problem declares mu = {mu_eff:e}",
            spec.mu
        ));
    }
    let (g, p) = (raw.grad_error_g(), raw.grad_error_p());
    let problem = raw
        .with_constants(mu_eff, ell)?
        .with_grad_error(g, p)
        .with_construction(spec.theorem.as_str());

    let mut per_dimension = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    for (label, sub, sx0) in blocks {
        let dim = sub.dim();
        per_dimension.push(DimensionBlock {
            label,
            problem: sub,
            x0: sx0,
            offset,
        });
        offset += dim;
    }

    // Drop empty intervals (they occur when boundaries cross) and re-clip.
    let mut regimes: Vec<RegimeInterval> = Vec::new();
    let mut cursor = 0.0;
    for d in drafts {
        let lo = d.lo.max(cursor);
        if d.hi <= lo {
            notes.push(format!(
                "regime `{}` is empty for these parameters",
                d.label
            ));
            continue;
        }
        regimes.push(RegimeInterval {
            lo,
            hi: d.hi,
            label: d.label.to_string(),
            block: d.block,
            gap_lower_bound: d.gap_lower_bound,
            derivation: d.derivation,
        });
        cursor = d.hi;
    }
    let analytic_lower_bound = regimes
        .iter()
        .map(|r| r.gap_lower_bound)
        .fold(f64::INFINITY, f64::min);
    if !(analytic_lower_bound > 0.0) || !analytic_lower_bound.is_finite() {
        return Err(LabError::Spec(format!(
            "analytic lower bound is not positive ({analytic_lower_bound:e})"
        )));
    }
    Ok(ConstructionBundle {
        spec: spec.clone(),
        problem,
        x0,
        per_dimension,
        regimes,
        analytic_lower_bound,
        constants,
        notes,
    })
}

pub(crate) const E_INV: f64 = 0.367_879_441_171_442_33;

pub(crate) fn one_minus_exp(t: f64) -> f64 {
    -(-t).exp_m1()
}
