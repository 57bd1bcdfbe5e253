//! Executable versions of the bounds: step-size sweeps for the lower
//! bounds, schedule runs for the upper bounds, rate fits and the synthetic
//! figure data.

mod figures;
mod lemmas;
mod lower;
mod rate;
mod upper;

pub use figures::{
    default_k_grid, reproduce_fig_gap_comparison, reproduce_fig_trajectory, GapComparison,
    GapComparisonSpec, GapRow, TrajectoryFigure, TrajectorySpec, TrajectoryStart, STRATEGY_HERDING,
    STRATEGY_IGD, STRATEGY_RR, STRATEGY_WITH_REPLACEMENT,
};
pub use lemmas::{
    contraction_suite, pq_lemma_checks, trig_identity_suite, ContractionSummary, PqCheckRow,
    TrigRow, TRIG_TOLERANCE,
};
pub use lower::{default_lower_grid, lower_bound_check, MIN_POINTS_PER_REGIME};
pub use rate::{rate_fit, RateFit};
pub use upper::{schedule_params, upper_bound_check, UpperParams};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::schedule::TheoremId;

pub const REPORT_SCHEMA: &str = "shuffle-sgd-lab/report/v1";
pub const THREADS_ENV: &str = "SHUFFLE_SGD_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub eta_grid: Vec<f64>,
    #[serde(rename = "K_list")]
    pub k_list: Vec<usize>,
    /// Runs per grid cell for randomized strategies.
    pub repeats: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(eta_grid: Vec<f64>) -> Result<Self> {
        let s = Self {
            eta_grid,
            k_list: Vec::new(),
            repeats: 1,
            seed: 0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_grid.is_empty() {
            return Err(LabError::Spec("eta grid is empty".into()));
        }
        if self.eta_grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(LabError::Spec(
                "eta grid must contain positive finite values".into(),
            ));
        }
        if self.eta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Spec(
                "eta grid must be strictly increasing".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(LabError::Spec("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

/// `count` log-spaced points from `lo` to `hi`, both included.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut v: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            v[0] = lo;
            v[count - 1] = hi;
            v
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub eta: f64,
    pub gap: f64,
    pub diverged: bool,
    pub regime: Option<String>,
}

/// Coverage and per-interval minimum of a lower-bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub label: String,
    pub lo: f64,
    #[serde(with = "crate::io::infinity_as_null")]
    pub hi: f64,
    pub points: usize,
    pub gap_lower_bound: f64,
    pub measured_min_gap: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedConstant {
    pub name: String,
    pub value: f64,
    pub derivation: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// measured ≥ analytic; margin = measured / analytic.
    Lower,
    /// measured ≤ analytic; margin = analytic / measured.
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub schema: String,
    pub theorem_id: TheoremId,
    pub kind: BoundKind,
    /// What `measured_inf_gap` measures: "final-gap" or "squared-distance".
    pub metric: String,
    pub params: BTreeMap<String, f64>,
    /// Minimum over the η grid (a single run for upper bounds).
    pub measured_inf_gap: f64,
    pub analytic_bound: f64,
    /// Infinite (null) when an upper-bound run lands exactly on the optimum.
    #[serde(with = "crate::io::infinity_as_null")]
    pub margin: f64,
    pub pass: bool,
    pub per_eta_table: Vec<EtaRow>,
    pub regimes: Vec<RegimeSummary>,
    pub constants: Vec<NamedConstant>,
    pub notes: Vec<String>,
}

impl BoundCheckReport {
    pub(crate) fn margin_for(kind: BoundKind, measured: f64, analytic: f64) -> f64 {
        match kind {
            BoundKind::Lower => measured / analytic,
            BoundKind::Upper if measured == 0.0 => f64::INFINITY,
            BoundKind::Upper => analytic / measured,
        }
    }
}

/// Thread count from `SHUFFLE_SGD_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
}

/// Ordered parallel map; results are in input order, so the output does not
/// depend on the thread count.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match configured_threads() {
        Some(1) => items.iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
        None => items.par_iter().map(f).collect(),
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
