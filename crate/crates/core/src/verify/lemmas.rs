use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::par_map;
use crate::error::{LabError, Result};
use crate::oracles::large_concave_pq;
use crate::rng::stream;

/// One grid η of the p, q inequality suite for the large-epoch concave
/// block, p = (1 − ηL)^{n/4}, q = (1 + η(L − 4μ))^{n/4}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PqCheckRow {
    pub eta: f64,
    /// 1 on [1/(μnK), μ/L²), 2 on [μ/L², 1/(nL)).
    pub sub_regime: u8,
    pub one_minus_p: f64,
    pub one_minus_p_bound: f64,
    pub one_minus_pq_k: f64,
    pub one_minus_pq_k_bound: f64,
    pub inv_one_minus_pq: f64,
    pub inv_one_minus_pq_bound: f64,
    /// pq ≤ e^{−ημn}.
    pub pq: f64,
    pub pq_bound: f64,
    pub pass: bool,
}

/// Evaluates the three inequalities at every η of `grid` inside
/// [1/(μnK), 1/(nL)); points outside are skipped. Needs K ≥ κ ≥ n ≥ 3.
pub fn pq_lemma_checks(
    mu: f64,
    ell: f64,
    n: usize,
    epochs: usize,
    grid: &[f64],
) -> Result<Vec<PqCheckRow>> {
    let (nf, k) = (n as f64, epochs as f64);
    let kappa = ell / mu;
    if !(k >= kappa && kappa >= nf && n >= 3) {
        return Err(LabError::Spec(format!(
            "K ≥ kappa ≥ n ≥ 3 violated (n = {n}, kappa = {kappa}, K = {epochs})"
        )));
    }
    let (lo, split, hi) = (1.0 / (mu * nf * k), mu / (ell * ell), 1.0 / (nf * ell));
    let mut rows = Vec::new();
    for &eta in grid.iter().filter(|&&e| e >= lo && e < hi) {
        let pq = large_concave_pq(mu, ell, n, eta)?;
        let prod = pq.p * pq.q;
        let sub_regime = if eta < split { 1 } else { 2 };
        let (p_bound, inv_bound) = if sub_regime == 1 {
            (ell / (8.0 * mu * k), 4.0 / (5.0 * eta * nf * mu))
        } else {
            (
                nf * mu / (8.0 * ell),
                4.0 / (5.0 * eta * eta * nf * ell * ell),
            )
        };
        let row = PqCheckRow {
            eta,
            sub_regime,
            one_minus_p: 1.0 - pq.p,
            one_minus_p_bound: p_bound,
            one_minus_pq_k: 1.0 - prod.powf(k),
            one_minus_pq_k_bound: 1.0 - (-1.0f64).exp(),
            inv_one_minus_pq: 1.0 / (1.0 - prod),
            inv_one_minus_pq_bound: inv_bound,
            pq: prod,
            pq_bound: (-eta * mu * nf).exp(),
            pass: false,
        };
        let pass = row.one_minus_p >= row.one_minus_p_bound
            && row.one_minus_pq_k >= row.one_minus_pq_k_bound
            && row.inv_one_minus_pq >= row.inv_one_minus_pq_bound
            && row.pq <= row.pq_bound;
        rows.push(PqCheckRow { pass, ..row });
    }
    Ok(rows)
}

/// Residuals of the root-of-unity sums for one n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigRow {
    pub n: usize,
    /// |Σcos θ_j|, |Σsin θ_j|, |Σcos² θ_j − n/2|, |Σsin² θ_j − n/2|, |Σsin 2θ_j| with θ_j = 2πj/n.
    pub residuals: [f64; 5],
    pub pass: bool,
}

/// Tolerance per unit of n.
pub const TRIG_TOLERANCE: f64 = 1e-9;

/// Rows in the order of `ns`; values of n are evaluated in parallel.
pub fn trig_identity_suite(ns: impl IntoIterator<Item = usize>) -> Vec<TrigRow> {
    let ns: Vec<usize> = ns.into_iter().collect();
    par_map(&ns, |&n| {
        let mut s = [0.0f64; 5];
        for j in 0..n {
            let theta = 2.0 * PI * j as f64 / n as f64;
            let (sn, cs) = theta.sin_cos();
            s[0] += cs;
            s[1] += sn;
            s[2] += cs * cs;
            s[3] += sn * sn;
            s[4] += 2.0 * sn * cs;
        }
        let half = n as f64 / 2.0;
        let residuals = [
            s[0].abs(),
            s[1].abs(),
            (s[2] - half).abs(),
            (s[3] - half).abs(),
            s[4].abs(),
        ];
        let pass = residuals.iter().all(|r| *r <= TRIG_TOLERANCE * n as f64);
        TrigRow { n, residuals, pass }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionSummary {
    pub trials: usize,
    pub violations: usize,
    /// max (q′ − p′) / ((1 − ημ)(q − p)); at most 1 when the suite passes.
    pub max_ratio: f64,
    /// min (q′ − p′); positive when order is preserved.
    pub min_gap_after: f64,
}

impl ContractionSummary {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// One gradient step on random f(x) = a/2·x² + bx with μ ≤ a ≤ L and
/// η < 1/L from two starts p < q: checks 0 < q′ − p′ ≤ (1 − ημ)(q − p).
pub fn contraction_suite(trials: usize, seed: u64) -> ContractionSummary {
    let mut rng = stream(seed, 0);
    let mut summary = ContractionSummary {
        trials,
        violations: 0,
        max_ratio: 0.0,
        min_gap_after: f64::INFINITY,
    };
    for _ in 0..trials {
        let mu: f64 = rng.random_range(0.01..1.0);
        let ell = mu * rng.random_range(1.0..1e3);
        let a = rng.random_range(mu..=ell);
        let b: f64 = rng.random_range(-10.0..10.0);
        let eta = rng.random_range(0.0..1.0) / ell;
        let p: f64 = rng.random_range(-100.0..100.0);
        let q = p + rng.random_range(1e-6..100.0);
        let step = |x: f64| x - eta * (a * x + b);
        let (pp, qq) = (step(p), step(q));
        let after = qq - pp;
        let allowed = (1.0 - eta * mu) * (q - p);
        let ratio = after / allowed;
        summary.max_ratio = summary.max_ratio.max(ratio);
        summary.min_gap_after = summary.min_gap_after.min(after);
        if !(after > 0.0) || after > allowed * (1.0 + 1e-12) {
            summary.violations += 1;
        }
    }
    summary
}
