//! Theorem identifiers and the step-size schedules attached to them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    SmallLbIdhess,
    SmallLbSc,
    SmallLbConcave,
    LargeLbIdhess,
    LargeLbConcave,
    SmallUbIdhess,
    SmallUbScvx,
    HerdingAtOpt,
    LargeUbAvg,
    LargeUbGeneralizedGrad,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        Self::SmallLbIdhess,
        Self::SmallLbSc,
        Self::SmallLbConcave,
        Self::LargeLbIdhess,
        Self::LargeLbConcave,
        Self::SmallUbIdhess,
        Self::SmallUbScvx,
        Self::HerdingAtOpt,
        Self::LargeUbAvg,
        Self::LargeUbGeneralizedGrad,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SmallLbIdhess => "small-lb-idhess",
            Self::SmallLbSc => "small-lb-sc",
            Self::SmallLbConcave => "small-lb-concave",
            Self::LargeLbIdhess => "large-lb-idhess",
            Self::LargeLbConcave => "large-lb-concave",
            Self::SmallUbIdhess => "small-ub-idhess",
            Self::SmallUbScvx => "small-ub-scvx",
            Self::HerdingAtOpt => "herding-at-opt",
            Self::LargeUbAvg => "large-ub-avg",
            Self::LargeUbGeneralizedGrad => "large-ub-generalizedgrad",
        }
    }

    pub fn is_lower_bound(self) -> bool {
        matches!(
            self,
            Self::SmallLbIdhess
                | Self::SmallLbSc
                | Self::SmallLbConcave
                | Self::LargeLbIdhess
                | Self::LargeLbConcave
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| LabError::UnknownTheorem(s.to_string()))
    }
}

/// Inputs to [`recommended_step_size`]. `scale` is the distance ‖x0 − x*‖
/// for the distance-based schedules and F(x0) − F* for the generalized
/// gradient one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub mu: f64,
    pub ell: f64,
    pub n: usize,
    pub epochs: usize,
    /// G* for the small-epoch schedules, G for the large-epoch ones.
    pub g: f64,
    pub scale: f64,
    pub h: f64,
}

/// max{log(arg), 1}; non-positive arguments give 1.
pub fn log_term(arg: f64) -> f64 {
    if arg > 0.0 {
        arg.ln().max(1.0)
    } else {
        1.0
    }
}

/// The log argument used by each schedule (before `max{log, 1}`).
pub fn log_argument(theorem: TheoremId, p: &StepParams) -> Option<f64> {
    let k = p.epochs as f64;
    let n = p.n as f64;
    let kappa = p.ell / p.mu;
    match theorem {
        TheoremId::SmallUbIdhess => Some(p.ell * p.scale / p.g),
        TheoremId::SmallUbScvx => Some(p.scale * p.mu * k / (kappa.sqrt() * p.g)),
        TheoremId::HerdingAtOpt => Some(p.scale * p.mu * n * k / (kappa.sqrt() * p.h * p.g)),
        TheoremId::LargeUbAvg => {
            Some(p.scale * p.scale * p.mu.powi(3) * k * k / (p.ell * p.g * p.g * (1.0 + k.ln())))
        }
        TheoremId::LargeUbGeneralizedGrad => {
            Some(p.scale * p.mu.powi(3) * k * k / (p.ell * p.ell * p.g * p.g))
        }
        _ => None,
    }
}

/// The schedule each theorem prescribes; lower-bound theorems return the
/// regime boundary 1/(μnK).
pub fn recommended_step_size(theorem: TheoremId, p: &StepParams) -> Result<f64> {
    if !(p.mu > 0.0) || p.n == 0 || p.epochs == 0 {
        return Err(LabError::Spec(
            "recommended_step_size needs mu > 0, n ≥ 1, K ≥ 1".into(),
        ));
    }
    let base = 1.0 / (p.mu * p.n as f64 * p.epochs as f64);
    let factor = match theorem {
        TheoremId::SmallUbIdhess | TheoremId::LargeUbAvg => 1.0,
        TheoremId::SmallUbScvx | TheoremId::HerdingAtOpt | TheoremId::LargeUbGeneralizedGrad => 2.0,
        _ => return Ok(base),
    };
    let arg = log_argument(theorem, p).expect("upper-bound theorem has a log argument");
    if arg.is_nan() || arg == f64::INFINITY {
        return Err(LabError::Spec(format!(
            "{theorem}: log argument is {arg}; check that G and H are positive"
        )));
    }
    Ok(factor * log_term(arg) * base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> StepParams {
        StepParams {
            mu: 1.0,
            ell: 100.0,
            n: 10,
            epochs: 10,
            g: 1.0,
            scale: 0.01,
            h: 1.0,
        }
    }

    #[test]
    fn log_of_one_picks_one() {
        let eta = recommended_step_size(TheoremId::SmallUbIdhess, &params()).unwrap();
        assert_eq!(eta, 1.0 / 100.0);
    }

    #[test]
    fn lower_bound_theorems_use_regime_boundary() {
        let p = StepParams {
            mu: 1.0,
            ell: 1e4,
            n: 100,
            epochs: 10,
            g: 1.0,
            scale: 0.0,
            h: 1.0,
        };
        assert_eq!(
            recommended_step_size(TheoremId::SmallLbConcave, &p).unwrap(),
            1e-3
        );
    }

    #[test]
    fn generalized_gradient_with_e_squared() {
        let e2 = std::f64::consts::E.powi(2);
        // scale·μ³K²/(L²G²) = e² with μ = 1, K = 10, L = 10, G = 1.
        let p = StepParams {
            mu: 1.0,
            ell: 10.0,
            n: 5,
            epochs: 10,
            g: 1.0,
            scale: e2,
            h: 1.0,
        };
        let eta = recommended_step_size(TheoremId::LargeUbGeneralizedGrad, &p).unwrap();
        assert!((eta - 4.0 / 50.0).abs() < 1e-15);
    }

    #[test]
    fn ids_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.as_str().parse::<TheoremId>().unwrap(), t);
        }
        assert!("nope".parse::<TheoremId>().is_err());
    }
}
