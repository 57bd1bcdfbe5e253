//! Instances for the small-epoch regime K ≲ κ.

use std::f64::consts::PI;

use super::{
    compute_u0_v0, finish, one_minus_exp, pm_block, scalar_block, ConstructionBundle,
    ConstructionSpec, RegimeDraft, E_INV, SMALL_STEP_FACTOR,
};
use crate::error::{LabError, Result};
use crate::linalg::{rotation, Matrix};
use crate::quadratic::{FiniteSumProblem, QuadraticComponent};
use crate::schedule::TheoremId;

fn expect_theorem(spec: &ConstructionSpec, id: TheoremId) -> Result<()> {
    if spec.theorem != id {
        return Err(LabError::Spec(format!(
            "builder for {id} called with {}",
            spec.theorem
        )));
    }
    spec.check_common()
}

/// Blocks: μ-quadratic, ±G split with curvature μK, L-quadratic.
/// Every component shares the Hessian diag(μ, μK, L).
pub fn build_small_lb_idhess(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    expect_theorem(spec, TheoremId::SmallLbIdhess)?;
    spec.require(spec.n >= 2, "n ≥ 2")?;
    spec.require(spec.kappa >= 2.0, "kappa ≥ 2")?;
    spec.require(spec.k() <= spec.kappa / 2.0, "K ≤ kappa/2")?;
    let (n, mu, g, k, ell) = (spec.n, spec.mu, spec.g, spec.k(), spec.ell());
    let a = mu * k;

    let x0 = g / (mu * k.sqrt());
    let z0 = g / (mu * ell * k).sqrt();
    let b1 = scalar_block(mu, |_| 0.0, n)?;
    let b2 = pm_block(a, g, n)?;
    let b3 = scalar_block(ell, |_| 0.0, n)?;

    let small = mu / 2.0 * (SMALL_STEP_FACTOR * x0).powi(2);
    let (c_mod, mod_text) = if n % 2 == 0 {
        (
            (1.0 - E_INV) * one_minus_exp(0.5) / 2.0,
            "x ≥ (1−e⁻¹)(1−e^{−1/2})G/(2μK); gap = μK/2·x²",
        )
    } else {
        (
            (1.0 - E_INV) * one_minus_exp(0.25).powi(2),
            "x ≥ (1−e⁻¹)(1−e^{−1/4})²G/(μK); gap = μK/2·x²",
        )
    };
    let moderate = a / 2.0 * (c_mod * g / a).powi(2);
    let large = ell / 2.0 * z0 * z0;

    let drafts = vec![
        RegimeDraft {
            lo: 0.0,
            hi: spec.eta_moderate(),
            label: "small",
            block: 0,
            gap_lower_bound: small,
            derivation: "x ≥ x0/4 since (1−1/m)^m ≥ 1/4; gap = μ/2·x²".into(),
        },
        RegimeDraft {
            lo: spec.eta_moderate(),
            hi: 2.0 / ell,
            label: "moderate",
            block: 1,
            gap_lower_bound: moderate,
            derivation: mod_text.into(),
        },
        RegimeDraft {
            lo: 2.0 / ell,
            hi: f64::INFINITY,
            label: "large",
            block: 2,
            gap_lower_bound: large,
            derivation: "|1−ηL| ≥ 1 keeps |z| ≥ z0; gap ≥ L/2·z0²".into(),
        },
    ];
    finish(
        spec,
        vec![
            ("mu-quadratic".into(), b1, vec![x0]),
            ("pm-offsets".into(), b2, vec![0.0]),
            ("L-quadratic".into(), b3, vec![z0]),
        ],
        drafts,
        vec![
            ("small_step_factor".into(), SMALL_STEP_FACTOR),
            ("moderate_iterate_constant".into(), c_mod),
        ],
        Vec::new(),
    )
}

/// Rotated 2D block with components f_1∘R_{i−1}⁻¹ where
/// f_1(x, y) = μ/2·x² + L′/2·y² − Gx and L′ = L/2.
pub fn rotated_block(mu: f64, ell: f64, g: f64, n: usize) -> Result<FiniteSumProblem> {
    let lam = Matrix::diag(&[mu, ell / 2.0]);
    let delta = 2.0 * PI / n as f64;
    let comps = (0..n)
        .map(|i| {
            let r = rotation(i as f64 * delta);
            let mut a = r.matmul(&lam).matmul(&r.transpose());
            let off = 0.5 * (a[(0, 1)] + a[(1, 0)]);
            a[(0, 1)] = off;
            a[(1, 0)] = off;
            let (s, c) = (i as f64 * delta).sin_cos();
            QuadraticComponent::new(a, vec![-g * c, -g * s])
        })
        .collect();
    FiniteSumProblem::new(comps)
}

pub fn build_small_lb_sc(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    expect_theorem(spec, TheoremId::SmallLbSc)?;
    spec.require(spec.n >= 3, "n ≥ 3")?;
    spec.require(spec.kappa >= 2.0, "kappa ≥ 2")?;
    spec.require(spec.k() <= spec.kappa / (16.0 * PI), "K ≤ kappa/(16π)")?;
    let (n, mu, g, k, ell, kappa) = (spec.n, spec.mu, spec.g, spec.k(), spec.ell(), spec.kappa);
    let m = (kappa / (k * k)).min(1.0);

    let x0 = kappa.sqrt() * m * g / mu;
    let w0 = g * m / mu;
    let start = compute_u0_v0(spec.eta_moderate(), mu, ell, n, g);
    let b1 = scalar_block(mu, |_| 0.0, n)?;
    let b2 = rotated_block(mu, ell, g, n)?;
    let b3 = scalar_block(ell, |_| 0.0, n)?;

    let c_rot = (1.0 - 2.0 * E_INV) / (32.0 * PI * PI);
    let drafts = vec![
        RegimeDraft {
            lo: 0.0,
            hi: spec.eta_moderate(),
            label: "small",
            block: 0,
            gap_lower_bound: mu / 2.0 * (SMALL_STEP_FACTOR * x0).powi(2),
            derivation: "x ≥ x0/4 since (1−1/m)^m ≥ 1/4; gap = μ/2·x²".into(),
        },
        RegimeDraft {
            lo: spec.eta_moderate(),
            hi: 2.0 / ell,
            label: "moderate",
            block: 1,
            gap_lower_bound: ell / 8.0 * (c_rot * g / mu * m).powi(2),
            derivation: "‖z‖ ≥ (1−2e⁻¹)G/(32π²μ)·min{1, κ/K²}; gap ≥ L/8·‖z‖²".into(),
        },
        RegimeDraft {
            lo: 2.0 / ell,
            hi: f64::INFINITY,
            label: "large",
            block: 2,
            gap_lower_bound: ell / 2.0 * w0 * w0,
            derivation: "|1−ηL| ≥ 1 keeps |w| ≥ w0; gap ≥ L/2·w0²".into(),
        },
    ];
    finish(
        spec,
        vec![
            ("mu-quadratic".into(), b1, vec![x0]),
            ("rotated-polygon".into(), b2, vec![start.u0, start.v0]),
            ("L-quadratic".into(), b3, vec![w0]),
        ],
        drafts,
        vec![
            ("small_step_factor".into(), SMALL_STEP_FACTOR),
            ("polygon_radius_constant".into(), c_rot),
            ("min_1_kappa_over_K2".into(), m),
        ],
        Vec::new(),
    )
}

/// `a` = L convex half (`L/2·x² + Gx`) and concave half (`−L/4·x² − Gx`);
/// odd n appends one zero component.
pub fn concave_block(ell: f64, g: f64, n: usize) -> Result<FiniteSumProblem> {
    let m = n - n % 2;
    let comps = (0..n)
        .map(|i| {
            if i < m / 2 {
                QuadraticComponent::scalar(ell, g)
            } else if i < m {
                QuadraticComponent::scalar(-ell / 2.0, -g)
            } else {
                QuadraticComponent::scalar(0.0, 0.0)
            }
        })
        .collect();
    FiniteSumProblem::new(comps)
}

pub fn build_small_lb_concave(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    expect_theorem(spec, TheoremId::SmallLbConcave)?;
    spec.require(spec.n >= 4, "n ≥ 4")?;
    spec.require(spec.kappa >= 4.0, "kappa ≥ 4")?;
    spec.require(spec.k() <= spec.kappa / 4.0, "K ≤ kappa/4")?;
    let d = spec
        .d
        .ok_or_else(|| LabError::Spec("D is required for small-lb-concave".into()))?;
    spec.require(
        d != 0.0 && d.is_finite(),
        "D ≠ 0 (the small-step branch of the bound is μD²/32)",
    )?;
    let (n, mu, g, k, ell) = (spec.n, spec.mu, spec.g, spec.k(), spec.ell());
    let m = n - n % 2;
    let growth_min = (1.0 + ell / (2.0 * mu * spec.nf() * k)).powi((m / 2) as i32);
    if growth_min <= 2.0 {
        return Err(LabError::Spec(format!(
            "(1 + L/(2μnK))^{{{}}} = {growth_min} ≤ 2: the concave block has no positive bound for these parameters",
            m / 2
        )));
    }
    let c = (1.0 / 9.0f64).min((growth_min - 2.0) / growth_min);
    // Averaged Hessian of the block: (L − L/2)/2 = L/4, i.e. F₂ = L/8·x².
    let curvature = (m as f64 / spec.nf()) * ell / 4.0;
    let mut notes = Vec::new();
    if n % 2 == 1 {
        notes.push(format!("odd n: one zero component appended; averaged Hessian of the block is {curvature:e} instead of L/4"));
    }
    if c < 1.0 / 9.0 {
        notes.push(format!(
            "growth factor {growth_min} < 9/4; offset constant lowered from 1/9 to {c}"
        ));
    }
    if (m / 2) % 2 == 1 {
        notes.push(
            "n/2 is odd: (1−ηL)^{n/2} < 0 for η > 1/L, where the sign argument behind the bound does not apply".into(),
        );
    }

    let b1 = scalar_block(mu, |_| 0.0, n)?;
    let b2 = concave_block(ell, g, n)?;
    let drafts = vec![
        RegimeDraft {
            lo: 0.0,
            hi: spec.eta_moderate(),
            label: "small",
            block: 0,
            gap_lower_bound: mu / 2.0 * (SMALL_STEP_FACTOR * d).powi(2),
            derivation: "x ≥ D/4 since (1−1/m)^m ≥ 1/4; gap = μ/2·x² = μD²/32".into(),
        },
        RegimeDraft {
            lo: spec.eta_moderate(),
            hi: f64::INFINITY,
            label: "moderate-and-large",
            block: 1,
            gap_lower_bound: curvature / 2.0 * (c * g / ell * growth_min).powi(2),
            derivation: "x ≥ c·(G/L)(1 + L/(2μnK))^{n/2} with c = 1/9; gap = L/8·x²".into(),
        },
    ];
    finish(
        spec,
        vec![
            ("mu-quadratic".into(), b1, vec![d]),
            ("concave-offsets".into(), b2, vec![0.0]),
        ],
        drafts,
        vec![
            ("small_step_factor".into(), SMALL_STEP_FACTOR),
            ("offset_constant".into(), c),
            ("growth_at_boundary".into(), growth_min),
        ],
        notes,
    )
}
