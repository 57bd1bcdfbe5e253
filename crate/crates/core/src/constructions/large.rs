//! Instances for the large-epoch regime K ≳ κ.

use super::{
    finish, one_minus_exp, pm_block, scalar_block, ConstructionBundle, ConstructionSpec,
    RegimeDraft, E_INV, SMALL_STEP_FACTOR,
};
use crate::error::{LabError, Result};
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

pub fn build_large_lb_idhess(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    expect_theorem(spec, TheoremId::LargeLbIdhess)?;
    spec.require(spec.n >= 2, "n ≥ 2")?;
    spec.require(spec.kappa >= 2.0, "kappa ≥ 2")?;
    spec.require(spec.k() >= spec.kappa, "K ≥ kappa")?;
    let (n, mu, g, k, ell, kappa) = (spec.n, spec.mu, spec.g, spec.k(), spec.ell(), spec.kappa);
    let lp = ell / 2.0;
    let scale = g / (mu * k);

    let x0 = kappa.sqrt() * scale;
    let z0 = scale;
    let b1 = scalar_block(mu, |_| 0.0, n)?;
    let b2 = pm_block(lp, g, n)?;
    let b3 = scalar_block(ell, |_| 0.0, n)?;

    let even = n % 2 == 0;
    let c1 = if even {
        (1.0 - E_INV) / 8.0
    } else {
        (1.0 - E_INV) / 32.0
    };
    let c2 = if even {
        (1.0 - E_INV) * one_minus_exp(0.5)
    } else {
        (1.0 - E_INV) * one_minus_exp(0.25) / 2.0
    };
    let drafts = vec![
        RegimeDraft {
            lo: 0.0,
            hi: spec.eta_moderate(),
            label: "small",
            block: 0,
            gap_lower_bound: mu / 2.0 * (SMALL_STEP_FACTOR * x0).powi(2),
            derivation: "x ≥ √κG/(4μK); gap = μ/2·x²".into(),
        },
        RegimeDraft {
            lo: spec.eta_moderate(),
            hi: 1.0 / (spec.nf() * lp),
            label: "moderate-low",
            block: 1,
            gap_lower_bound: lp / 2.0 * (c1 * scale).powi(2),
            derivation: format!("y ≥ {c1:.6}·G/(μK); gap = L′/2·y²"),
        },
        RegimeDraft {
            lo: 1.0 / (spec.nf() * lp),
            hi: 2.0 / ell,
            label: "moderate-high",
            block: 1,
            gap_lower_bound: lp / 2.0 * (c2 * scale).powi(2),
            derivation: format!("y ≥ {c2:.6}·G/(μK); gap = L′/2·y²"),
        },
        RegimeDraft {
            lo: 2.0 / ell,
            hi: f64::INFINITY,
            label: "large",
            block: 2,
            gap_lower_bound: ell / 2.0 * z0 * z0,
            derivation: "|1−ηL| ≥ 1 keeps |z| ≥ G/(μK); gap ≥ L/2·z²".into(),
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
            ("moderate_low_constant".into(), c1),
            ("moderate_high_constant".into(), c2),
        ],
        Vec::new(),
    )
}

/// Four equal groups of n/4 components: `Gx`, `L/2·x²`, `−Gx`,
/// `−(L−4μ)/2·x²`, padded with zero components when 4 ∤ n.
/// The averaged curvature is (4⌊n/4⌋/n)·μ.
pub fn large_concave_block(mu: f64, ell: f64, g: f64, n: usize) -> Result<FiniteSumProblem> {
    let b = n / 4;
    let comps = (0..n)
        .map(|i| match i / b.max(1) {
            _ if i >= 4 * b => QuadraticComponent::scalar(0.0, 0.0),
            0 => QuadraticComponent::scalar(0.0, g),
            1 => QuadraticComponent::scalar(ell, 0.0),
            2 => QuadraticComponent::scalar(0.0, -g),
            _ => QuadraticComponent::scalar(-(ell - 4.0 * mu), 0.0),
        })
        .collect();
    FiniteSumProblem::new(comps)
}

pub fn build_large_lb_concave(spec: &ConstructionSpec) -> Result<ConstructionBundle> {
    expect_theorem(spec, TheoremId::LargeLbConcave)?;
    spec.require(spec.n >= 4, "n ≥ 4")?;
    spec.require(spec.kappa >= spec.nf(), "kappa ≥ n")?;
    let k_min = (spec.kappa.powi(3) / (spec.nf() * spec.nf())).max(spec.kappa.powf(1.5));
    spec.require(
        spec.k() >= k_min,
        format!("K ≥ max(kappa³/n², kappa^1.5) = {k_min}"),
    )?;
    let (n, mu, g, k, ell, kappa) = (spec.n, spec.mu, spec.g, spec.k(), spec.ell(), spec.kappa);
    let lp = ell / 2.0;
    let m4 = 4 * (n / 4);
    let frac = m4 as f64 / spec.nf();

    let x0 = ell * g / (mu * mu * k);
    let w0 = kappa.sqrt() * g / (mu * k);
    let b1 = scalar_block(mu, |_| 0.0, n)?;
    let b2 = large_concave_block(mu, ell, g, n)?;
    let b3 = pm_block(lp, g, n)?;
    let b4 = scalar_block(ell, |_| 0.0, n)?;

    let c_mid = (1.0 - E_INV) / 40.0;
    let x3 = if n % 2 == 0 {
        (g / lp) * one_minus_exp(0.25).powi(2) / 2.0
    } else {
        (g / (4.0 * lp)) * (1.0 - E_INV) * one_minus_exp(1.0 / 6.0)
    };
    let mut notes = Vec::new();
    if m4 < n {
        notes.push(format!(
            "n = {n} is not a multiple of 4: {} zero components pad the concave block; its constants are derived for the first {m4}",
            n - m4
        ));
    }
    let drafts = vec![
        RegimeDraft {
            lo: 0.0,
            hi: spec.eta_moderate(),
            label: "small",
            block: 0,
            gap_lower_bound: mu / 2.0 * (SMALL_STEP_FACTOR * x0).powi(2),
            derivation: "x ≥ LG/(4μ²K); gap = μ/2·x²".into(),
        },
        RegimeDraft {
            lo: spec.eta_moderate(),
            hi: 1.0 / (spec.nf() * ell),
            label: "moderate-low",
            block: 1,
            gap_lower_bound: frac * mu / 2.0 * (c_mid * ell * g / (mu * mu * k)).powi(2),
            derivation: "y ≥ (1−e⁻¹)LG/(40μ²K) from 1−p, 1−(pq)^K and 1/(1−pq); gap = μ/2·y²"
                .into(),
        },
        RegimeDraft {
            lo: 1.0 / (spec.nf() * ell),
            hi: 2.0 / ell,
            label: "moderate-high",
            block: 2,
            gap_lower_bound: lp / 2.0 * x3 * x3,
            derivation: format!("z ≥ {x3:e} from the ±G split at curvature L′; gap = L′/2·z²"),
        },
        RegimeDraft {
            lo: 2.0 / ell,
            hi: f64::INFINITY,
            label: "large",
            block: 3,
            gap_lower_bound: ell / 2.0 * w0 * w0,
            derivation: "|1−ηL| ≥ 1 keeps |w| ≥ √κG/(μK); gap ≥ L/2·w²".into(),
        },
    ];
    finish(
        spec,
        vec![
            ("mu-quadratic".into(), b1, vec![x0]),
            ("concave-groups".into(), b2, vec![0.0]),
            ("pm-offsets".into(), b3, vec![0.0]),
            ("L-quadratic".into(), b4, vec![w0]),
        ],
        drafts,
        vec![
            ("small_step_factor".into(), SMALL_STEP_FACTOR),
            ("moderate_low_constant".into(), c_mid),
            ("moderate_high_iterate".into(), x3),
            ("concave_group_fraction".into(), frac),
        ],
        notes,
    )
}
