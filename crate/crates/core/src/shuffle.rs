//! Index schedules for permutation-based SGD and the update loop.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg;
use crate::quadratic::{gap_unchecked, FiniteSumProblem};
use crate::rng;

/// Iterates whose sup-norm exceeds this are treated as diverged, which keeps
/// the recorded gap finite for every L this crate builds.
pub const DIVERGENCE_THRESHOLD: f64 = 1e100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShuffleStrategy {
    Igd,
    RandomReshuffle { seed: u64 },
    SingleShuffle { seed: u64 },
    FixedPermutation { sigma: Vec<usize> },
    WithReplacement { seed: u64 },
    HerdingAtOptimum { sigma: Vec<usize> },
}

impl ShuffleStrategy {
    /// Checks that any carried permutation is a bijection on `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Self::FixedPermutation { sigma } | Self::HerdingAtOptimum { sigma } => {
                if !is_permutation(sigma, n) {
                    return Err(LabError::Spec(format!(
                        "sigma is not a permutation of 0..{n}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_permutation_based(&self) -> bool {
        !matches!(self, Self::WithReplacement { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Igd => "igd",
            Self::RandomReshuffle { .. } => "rr",
            Self::SingleShuffle { .. } => "ss",
            Self::FixedPermutation { .. } => "fixed",
            Self::WithReplacement { .. } => "with-replacement",
            Self::HerdingAtOptimum { .. } => "herding-at-opt",
        }
    }
}

pub fn is_permutation(sigma: &[usize], n: usize) -> bool {
    if sigma.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return false;
        }
        seen[s] = true;
    }
    true
}

/// Order for epoch `k` (1-based), 0-based component indices.
pub fn epoch_order(strategy: &ShuffleStrategy, k: usize, n: usize) -> Vec<usize> {
    match strategy {
        ShuffleStrategy::Igd => (0..n).collect(),
        ShuffleStrategy::RandomReshuffle { seed } => {
            rng::fisher_yates(&mut rng::stream(*seed, k as u64), n)
        }
        ShuffleStrategy::SingleShuffle { seed } => rng::fisher_yates(&mut rng::stream(*seed, 1), n),
        ShuffleStrategy::FixedPermutation { sigma }
        | ShuffleStrategy::HerdingAtOptimum { sigma } => sigma.clone(),
        ShuffleStrategy::WithReplacement { seed } => {
            rng::iid_indices(&mut rng::stream(*seed, k as u64), n)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eta: f64,
    pub epochs: usize,
    pub x0: Vec<f64>,
    pub record_every_iterate: bool,
}

impl RunConfig {
    pub fn new(eta: f64, epochs: usize, x0: Vec<f64>) -> Self {
        Self {
            eta,
            epochs,
            x0,
            record_every_iterate: false,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_every_iterate = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    /// 1-based epoch in which the threshold was crossed.
    pub epoch: usize,
    /// 0-based step within that epoch.
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// x_0^k for k = 0..=K; on divergence, the completed epochs followed by
    /// the last finite iterate.
    pub epoch_starts: Vec<Vec<f64>>,
    pub final_iterate: Vec<f64>,
    /// Gap at each entry of `epoch_starts`.
    pub gaps: Vec<f64>,
    pub full_trace: Option<Vec<Vec<f64>>>,
    pub diverged: Option<Divergence>,
}

impl RunRecord {
    pub fn final_gap(&self) -> f64 {
        *self.gaps.last().expect("record has at least x0")
    }
}

/// Runs nK steps of x ← x − η∇f_{σ_k(i)}(x).
pub fn run(
    problem: &FiniteSumProblem,
    strategy: &ShuffleStrategy,
    config: &RunConfig,
) -> Result<RunRecord> {
    problem.check_dim(&config.x0)?;
    if !(config.eta > 0.0) || !config.eta.is_finite() {
        return Err(LabError::Spec(format!(
            "step size must be positive, got {}",
            config.eta
        )));
    }
    if config.epochs == 0 {
        return Err(LabError::Spec("epoch count K must be at least 1".into()));
    }
    let n = problem.n();
    strategy.validate(n)?;
    let d = problem.dim();
    let eta = config.eta;
    let comps = problem.components();

    let mut x = config.x0.clone();
    let mut grad = vec![0.0; d];
    let mut epoch_starts = vec![x.clone()];
    let mut gaps = vec![gap_unchecked(problem, &x)];
    let mut trace = config.record_every_iterate.then(|| {
        let mut t = Vec::with_capacity(n * config.epochs + 1);
        t.push(x.clone());
        t
    });
    let mut last = x.clone();

    for k in 1..=config.epochs {
        let order = epoch_order(strategy, k, n);
        for (step, &i) in order.iter().enumerate() {
            last.copy_from_slice(&x);
            comps[i].gradient_into(&x, &mut grad);
            for (xj, gj) in x.iter_mut().zip(&grad) {
                *xj -= eta * gj;
            }
            if x.iter()
                .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_THRESHOLD)
            {
                let keep = if x.iter().all(|v| v.is_finite()) {
                    x.clone()
                } else {
                    last.clone()
                };
                if let Some(t) = trace.as_mut() {
                    t.push(keep.clone());
                }
                gaps.push(gap_unchecked(problem, &keep));
                epoch_starts.push(keep.clone());
                return Ok(RunRecord {
                    epoch_starts,
                    final_iterate: keep,
                    gaps,
                    full_trace: trace,
                    diverged: Some(Divergence { epoch: k, step }),
                });
            }
            if let Some(t) = trace.as_mut() {
                t.push(x.clone());
            }
        }
        gaps.push(gap_unchecked(problem, &x));
        epoch_starts.push(x.clone());
    }
    Ok(RunRecord {
        epoch_starts,
        final_iterate: x,
        gaps,
        full_trace: trace,
        diverged: None,
    })
}

/// Distance ‖x − x*‖.
pub fn distance_to_opt(problem: &FiniteSumProblem, x: &[f64]) -> f64 {
    linalg::norm(&linalg::sub(x, problem.minimizer()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadratic::QuadraticComponent;

    fn pm_problem(a: f64, g: f64, n: usize) -> FiniteSumProblem {
        let comps = (0..n)
            .map(|i| QuadraticComponent::scalar(a, if i < n / 2 { g } else { -g }))
            .collect();
        FiniteSumProblem::new(comps).unwrap()
    }

    #[test]
    fn igd_order_is_identity() {
        assert_eq!(epoch_order(&ShuffleStrategy::Igd, 7, 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_shuffle_reuses_first_epoch() {
        let s = ShuffleStrategy::SingleShuffle { seed: 11 };
        assert_eq!(epoch_order(&s, 1, 30), epoch_order(&s, 9, 30));
    }

    #[test]
    fn single_newton_like_step() {
        let p = FiniteSumProblem::new(vec![QuadraticComponent::scalar(1.0, 0.0)]).unwrap();
        let r = run(
            &p,
            &ShuffleStrategy::Igd,
            &RunConfig::new(1.0, 1, vec![5.0]),
        )
        .unwrap();
        assert_eq!(r.final_iterate, vec![0.0]);
    }

    #[test]
    fn two_hand_unrolled_steps() {
        // x1 = 0 − 0.1(0 + 1) = −0.1; x2 = −0.1 − 0.1(−0.1 − 1) = 0.01.
        let p = pm_problem(1.0, 1.0, 2);
        let r = run(
            &p,
            &ShuffleStrategy::Igd,
            &RunConfig::new(0.1, 1, vec![0.0]),
        )
        .unwrap();
        assert!((r.final_iterate[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn trace_length_and_endpoints() {
        let p = pm_problem(1.0, 1.0, 4);
        let r = run(
            &p,
            &ShuffleStrategy::RandomReshuffle { seed: 1 },
            &RunConfig::new(0.1, 3, vec![1.0]).with_trace(),
        )
        .unwrap();
        let t = r.full_trace.as_ref().unwrap();
        assert_eq!(t.len(), 13);
        assert_eq!(r.epoch_starts.len(), 4);
        assert_eq!(r.epoch_starts[0], vec![1.0]);
        assert_eq!(r.epoch_starts[3], r.final_iterate);
        assert_eq!(t[12], r.final_iterate);
    }

    #[test]
    fn divergence_is_flagged_with_finite_last_iterate() {
        let p = FiniteSumProblem::new(vec![QuadraticComponent::scalar(1.0, 0.0)]).unwrap();
        let r = run(
            &p,
            &ShuffleStrategy::Igd,
            &RunConfig::new(10.0, 1000, vec![1.0]),
        )
        .unwrap();
        assert!(r.diverged.is_some());
        assert!(r.final_iterate[0].is_finite());
        assert!(r.final_gap().is_finite() && r.final_gap() > 1e100);
    }

    #[test]
    fn bad_sigma_is_rejected() {
        let p = pm_problem(1.0, 1.0, 2);
        let s = ShuffleStrategy::FixedPermutation { sigma: vec![0, 0] };
        assert!(run(&p, &s, &RunConfig::new(0.1, 1, vec![0.0])).is_err());
    }
}
