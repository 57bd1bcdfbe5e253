use serde::{Deserialize, Serialize};

use super::{log_spaced, par_map, quantile};
use crate::constructions::{compute_u0_v0, concave_block, rotated_block};
use crate::error::{LabError, Result};
use crate::herding::herding_at_opt_strategy;
use crate::linalg::rotation;
use crate::shuffle::{run, RunConfig, ShuffleStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryStart {
    /// x* = 0.
    Origin,
    /// (u₀(η), v₀(η)), the fixed start of the polygon.
    Polygon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub mu: f64,
    #[serde(rename = "L")]
    pub ell: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub n: usize,
    #[serde(rename = "K")]
    pub epochs: usize,
    pub start: TrajectoryStart,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            mu: 1.0,
            ell: 1e4,
            g: 1.0,
            n: 1000,
            epochs: 20,
            start: TrajectoryStart::Origin,
        }
    }
}

impl TrajectorySpec {
    /// η = 1/(μnK).
    pub fn eta(&self) -> f64 {
        1.0 / (self.mu * self.n as f64 * self.epochs as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(LabError::Spec(format!(
                "{what} violated (n = {}, K = {})",
                self.n, self.epochs
            )))
        };
        if !(self.mu > 0.0) || !(self.ell >= self.mu) || !(self.g > 0.0) || !self.ell.is_finite() {
            return bad("0 < mu ≤ L, G > 0");
        }
        if self.n < 3 {
            return bad("n ≥ 3");
        }
        if self.epochs == 0
            || self.epochs as f64 > self.ell / self.mu / (16.0 * std::f64::consts::PI)
        {
            return bad("1 ≤ K ≤ kappa/(16π)");
        }
        if self.eta() >= 2.0 / self.ell {
            return bad("1/(μnK) < 2/L");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFigure {
    pub spec: TrajectorySpec,
    pub eta: f64,
    /// Every iterate, nK + 1 points.
    pub points: Vec<[f64; 2]>,
    pub epoch_start_radii: Vec<f64>,
    pub final_radius: f64,
    /// Epoch-start radius is nondecreasing from epoch 2 on.
    pub drifts_outward: bool,
    /// max_k ‖x₀^k − x₀^0‖ / ‖x₀^0‖ (0 for the origin start).
    pub closure_error: f64,
    /// max_i ‖x_{i+1} − R₁x_i‖ / ‖x₀^0‖ (0 for the origin start).
    pub rotation_error: f64,
}

/// IGD on the rotated 2D block with η = 1/(μnK), full trace.
pub fn reproduce_fig_trajectory(spec: &TrajectorySpec) -> Result<TrajectoryFigure> {
    spec.validate()?;
    let eta = spec.eta();
    let block = rotated_block(spec.mu, spec.ell, spec.g, spec.n)?;
    let x0 = match spec.start {
        TrajectoryStart::Origin => vec![0.0, 0.0],
        TrajectoryStart::Polygon => {
            let s = compute_u0_v0(eta, spec.mu, spec.ell, spec.n, spec.g);
            vec![s.u0, s.v0]
        }
    };
    let rec = run(
        &block,
        &ShuffleStrategy::Igd,
        &RunConfig::new(eta, spec.epochs, x0.clone()).with_trace(),
    )?;
    let points: Vec<[f64; 2]> = rec
        .full_trace
        .unwrap_or_default()
        .iter()
        .map(|p| [p[0], p[1]])
        .collect();
    let epoch_start_radii: Vec<f64> = rec.epoch_starts.iter().map(|p| p[0].hypot(p[1])).collect();
    let final_radius = *epoch_start_radii.last().expect("record has x0");
    let drifts_outward = epoch_start_radii
        .iter()
        .skip(2)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] >= w[0]);

    let r0 = x0[0].hypot(x0[1]);
    let (mut closure_error, mut rotation_error) = (0.0f64, 0.0f64);
    if r0 > 0.0 {
        for p in &rec.epoch_starts {
            closure_error = closure_error.max((p[0] - x0[0]).hypot(p[1] - x0[1]) / r0);
        }
        let r1 = rotation(2.0 * std::f64::consts::PI / spec.n as f64);
        for w in points.windows(2) {
            let rot = r1.mul_vec(&w[0]);
            rotation_error = rotation_error.max((rot[0] - w[1][0]).hypot(rot[1] - w[1][1]) / r0);
        }
    }
    Ok(TrajectoryFigure {
        spec: spec.clone(),
        eta,
        points,
        epoch_start_radii,
        final_radius,
        drifts_outward,
        closure_error,
        rotation_error,
    })
}

pub const STRATEGY_IGD: &str = "igd";
pub const STRATEGY_RR: &str = "rr";
pub const STRATEGY_WITH_REPLACEMENT: &str = "with-replacement";
pub const STRATEGY_HERDING: &str = "herding-at-opt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapComparisonSpec {
    pub mu: f64,
    #[serde(rename = "L")]
    pub ell: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub n: usize,
    #[serde(rename = "K_list")]
    pub k_list: Vec<usize>,
    pub seeds: usize,
    pub seed: u64,
}

impl Default for GapComparisonSpec {
    /// Eight log-spaced K over [κ/n, κ/4] for κ = 10⁴, n = 100.
    fn default() -> Self {
        let (mu, ell, n) = (1.0, 1e4, 100usize);
        Self {
            mu,
            ell,
            g: 1.0,
            n,
            k_list: default_k_grid(ell / mu, n, 8),
            seeds: 20,
            seed: 0,
        }
    }
}

/// `count` distinct log-spaced integers over [κ/n, κ/4].
pub fn default_k_grid(kappa: f64, n: usize, count: usize) -> Vec<usize> {
    let lo = (kappa / n as f64).ceil().max(1.0);
    let hi = (kappa / 4.0).floor().max(lo);
    let mut ks: Vec<usize> = log_spaced(lo, hi, count)
        .into_iter()
        .map(|k| k.round() as usize)
        .collect();
    ks.dedup();
    ks
}

impl GapComparisonSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.ell >= self.mu) || !(self.g > 0.0) || !self.ell.is_finite() {
            return Err(LabError::Spec("0 < mu ≤ L and G > 0 required".into()));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return Err(LabError::Spec(format!(
                "n = {} must be even and ≥ 4",
                self.n
            )));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(LabError::Spec("K_list must be non-empty with K ≥ 1".into()));
        }
        if self.k_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Spec("K_list must be strictly increasing".into()));
        }
        let kmax = self.ell / self.mu / 4.0;
        if let Some(k) = self.k_list.iter().find(|&&k| k as f64 > kmax) {
            return Err(LabError::Spec(format!(
                "K = {k} violates K ≤ kappa/4 = {kmax}"
            )));
        }
        if self.seeds == 0 {
            return Err(LabError::Spec("seeds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub strategy: String,
    pub mean_gap: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    pub spec: GapComparisonSpec,
    pub rows: Vec<GapRow>,
    /// IGD mean over RR mean at the smallest K.
    pub igd_over_rr_at_smallest_k: f64,
    /// At every K, the RR mean lies in the with-replacement band [q1, q3]
    /// and the with-replacement mean lies in the RR band.
    pub rr_wr_within_iqr: bool,
    /// At every K, the RR and with-replacement [q1, q3] bands intersect.
    pub rr_wr_bands_overlap: bool,
    /// Herding-at-optimum gap ≤ RR mean at every K.
    pub herding_below_rr: bool,
}

impl GapComparison {
    pub fn row(&self, k: usize, strategy: &str) -> Option<&GapRow> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.strategy == strategy)
    }
}

/// IGD, RR, with-replacement SGD and herding-at-optimum on the concave
/// two-piece block from x0 = 0 with η = 1/(μnK). Randomized strategies use
/// seeds `seed..seed + seeds`.
pub fn reproduce_fig_gap_comparison(spec: &GapComparisonSpec) -> Result<GapComparison> {
    spec.validate()?;
    let problem = concave_block(spec.ell, spec.g, spec.n)?;
    let (herding, _) = herding_at_opt_strategy(&problem, None)?;
    let x0 = vec![0.0];

    let mut cells: Vec<(usize, &'static str, ShuffleStrategy)> = Vec::new();
    for &k in &spec.k_list {
        cells.push((k, STRATEGY_IGD, ShuffleStrategy::Igd));
        for s in 0..spec.seeds as u64 {
            cells.push((
                k,
                STRATEGY_RR,
                ShuffleStrategy::RandomReshuffle {
                    seed: spec.seed + s,
                },
            ));
        }
        for s in 0..spec.seeds as u64 {
            cells.push((
                k,
                STRATEGY_WITH_REPLACEMENT,
                ShuffleStrategy::WithReplacement {
                    seed: spec.seed + s,
                },
            ));
        }
        cells.push((k, STRATEGY_HERDING, herding.clone()));
    }
    let gaps = par_map(&cells, |(k, _, strategy)| {
        let eta = 1.0 / (spec.mu * spec.n as f64 * *k as f64);
        run(&problem, strategy, &RunConfig::new(eta, *k, x0.clone())).map(|r| r.final_gap())
    });

    let mut rows = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        let (k, name) = (cells[i].0, cells[i].1);
        let mut values = Vec::new();
        while i < cells.len() && cells[i].0 == k && cells[i].1 == name {
            values.push(gaps[i].clone()?);
            i += 1;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.sort_by(f64::total_cmp);
        rows.push(GapRow {
            k,
            strategy: name.into(),
            mean_gap: mean,
            q1: quantile(&values, 0.25),
            q3: quantile(&values, 0.75),
        });
    }

    let find = |k: usize, s: &str| {
        rows.iter()
            .find(|r| r.k == k && r.strategy == s)
            .expect("row for every cell")
    };
    let k0 = spec.k_list[0];
    let igd_over_rr_at_smallest_k =
        find(k0, STRATEGY_IGD).mean_gap / find(k0, STRATEGY_RR).mean_gap;
    let within = |m: f64, band: &GapRow| m >= band.q1 && m <= band.q3;
    let rr_wr_within_iqr = spec.k_list.iter().all(|&k| {
        let (rr, wr) = (find(k, STRATEGY_RR), find(k, STRATEGY_WITH_REPLACEMENT));
        within(rr.mean_gap, wr) && within(wr.mean_gap, rr)
    });
    let rr_wr_bands_overlap = spec.k_list.iter().all(|&k| {
        let (rr, wr) = (find(k, STRATEGY_RR), find(k, STRATEGY_WITH_REPLACEMENT));
        rr.q1 <= wr.q3 && wr.q1 <= rr.q3
    });
    let herding_below_rr = spec
        .k_list
        .iter()
        .all(|&k| find(k, STRATEGY_HERDING).mean_gap <= find(k, STRATEGY_RR).mean_gap);
    Ok(GapComparison {
        spec: spec.clone(),
        rows,
        igd_over_rr_at_smallest_k,
        rr_wr_within_iqr,
        rr_wr_bands_overlap,
        herding_below_rr,
    })
}
