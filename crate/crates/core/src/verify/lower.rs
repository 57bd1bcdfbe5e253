use std::collections::BTreeMap;

use super::{
    log_spaced, par_map, BoundCheckReport, BoundKind, EtaRow, NamedConstant, RegimeSummary,
    SweepSpec, REPORT_SCHEMA,
};
use crate::constructions::{build, ConstructionBundle, ConstructionSpec};
use crate::error::{LabError, Result};
use crate::schedule::TheoremId;
use crate::shuffle::{run, RunConfig, ShuffleStrategy};

pub const MIN_POINTS_PER_REGIME: usize = 20;
/// Right-open endpoints are sampled at `hi·(1 − 1e-9)`.
const OPEN_END: f64 = 1.0 - 1e-9;
/// The first interval (0, b) is sampled from b/1000.
const FIRST_SPAN: f64 = 1e3;
/// The last interval [a, ∞) is sampled up to 100·a.
const LAST_SPAN: f64 = 1e2;

/// `points_per_regime` log-spaced step sizes in every regime interval of the
/// bundle, endpoints included.
pub fn default_lower_grid(bundle: &ConstructionBundle, points_per_regime: usize) -> Vec<f64> {
    let mut grid = Vec::new();
    for r in &bundle.regimes {
        let lo = if r.lo == 0.0 { r.hi / FIRST_SPAN } else { r.lo };
        let hi = if r.hi.is_infinite() {
            lo * LAST_SPAN
        } else {
            r.hi * OPEN_END
        };
        if hi > lo {
            grid.extend(log_spaced(lo, hi, points_per_regime));
        } else {
            grid.push(lo);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Runs IGD from the bundle's x0 for every η of the grid and compares the
/// smallest final gap with the analytic lower bound. `sweep.k_list` is not
/// used here; K comes from `spec`.
pub fn lower_bound_check(
    theorem: TheoremId,
    spec: &ConstructionSpec,
    sweep: &SweepSpec,
) -> Result<BoundCheckReport> {
    if spec.theorem != theorem {
        return Err(LabError::Spec(format!(
            "spec is for {} but {theorem} was requested",
            spec.theorem
        )));
    }
    if !theorem.is_lower_bound() {
        return Err(LabError::Spec(format!(
            "{theorem} is not a lower-bound theorem"
        )));
    }
    sweep.validate()?;
    let bundle = build(spec)?;

    let mut regimes = Vec::with_capacity(bundle.regimes.len());
    for r in &bundle.regimes {
        let points = sweep.eta_grid.iter().filter(|&&e| r.contains(e)).count();
        if points < MIN_POINTS_PER_REGIME {
            return Err(LabError::UncoveredRegime {
                lo: r.lo,
                hi: r.hi,
                reason: format!(
                    "regime `{}` has {points} grid points, need {MIN_POINTS_PER_REGIME}",
                    r.label
                ),
            });
        }
        regimes.push(RegimeSummary {
            label: r.label.clone(),
            lo: r.lo,
            hi: r.hi,
            points,
            gap_lower_bound: r.gap_lower_bound,
            measured_min_gap: f64::INFINITY,
            pass: false,
        });
    }

    let cells = par_map(&sweep.eta_grid, |&eta| {
        run(
            &bundle.problem,
            &ShuffleStrategy::Igd,
            &RunConfig::new(eta, spec.epochs, bundle.x0.clone()),
        )
        .map(|rec| (rec.final_gap(), rec.diverged.is_some()))
    });

    let mut per_eta_table = Vec::with_capacity(cells.len());
    for (&eta, cell) in sweep.eta_grid.iter().zip(cells) {
        let (gap, diverged) = cell?;
        let regime = bundle.regimes.iter().position(|r| r.contains(eta));
        if let Some(i) = regime {
            regimes[i].measured_min_gap = regimes[i].measured_min_gap.min(gap);
        }
        per_eta_table.push(EtaRow {
            eta,
            gap,
            diverged,
            regime: regime.map(|i| regimes[i].label.clone()),
        });
    }
    for r in &mut regimes {
        r.pass = r.measured_min_gap >= r.gap_lower_bound;
    }

    let measured = per_eta_table
        .iter()
        .map(|r| r.gap)
        .fold(f64::INFINITY, f64::min);
    let analytic = bundle.analytic_lower_bound;
    let margin = BoundCheckReport::margin_for(BoundKind::Lower, measured, analytic);

    let mut params = BTreeMap::new();
    params.insert("n".into(), spec.n as f64);
    params.insert("kappa".into(), spec.kappa);
    params.insert("K".into(), spec.epochs as f64);
    params.insert("G".into(), spec.g);
    params.insert("mu".into(), spec.mu);
    params.insert("L".into(), spec.ell());
    if let Some(d) = spec.d {
        params.insert("D".into(), d);
    }
    params.insert("grid_points".into(), sweep.eta_grid.len() as f64);
    params.insert("eta_min".into(), sweep.eta_grid[0]);
    params.insert(
        "eta_max".into(),
        *sweep.eta_grid.last().expect("validated non-empty"),
    );

    let mut constants: Vec<NamedConstant> = bundle
        .constants
        .iter()
        .map(|(name, value)| NamedConstant {
            name: name.clone(),
            value: *value,
            derivation: String::new(),
        })
        .collect();
    constants.extend(bundle.regimes.iter().map(|r| NamedConstant {
        name: format!("bound:{}", r.label),
        value: r.gap_lower_bound,
        derivation: r.derivation.clone(),
    }));

    Ok(BoundCheckReport {
        schema: REPORT_SCHEMA.into(),
        theorem_id: theorem,
        kind: BoundKind::Lower,
        metric: "final-gap".into(),
        params,
        measured_inf_gap: measured,
        analytic_bound: analytic,
        margin,
        pass: margin >= 1.0,
        per_eta_table,
        regimes,
        constants,
        notes: bundle.notes.clone(),
    })
}
