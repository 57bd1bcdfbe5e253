//! Fixed start of the rotated 2D block: the point whose IGD epoch traces a
//! regular n-gon and returns to itself.
//!
//! With δ = 2π/n, L′ = L/2 and Λ = diag(μ, L′), the start z solves
//! (R_δ − I + ηΛ) z = ηG e₁, giving
//! u₀ = ηG(ηL′ − (1 − cos δ))/D, v₀ = −ηG sin δ/D,
//! D = (1 − cos δ)(2 − (μ + L′)η) + η²μL′.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U0V0 {
    pub u0: f64,
    pub v0: f64,
    /// Holds when ηL′ > 1 − cos δ and η < 2/L, which covers the moderate
    /// regime [1/(μnK), 2/L) whenever K ≤ κ/(16π).
    pub signs_guaranteed: bool,
}

pub fn compute_u0_v0(eta: f64, mu: f64, ell: f64, n: usize, g: f64) -> U0V0 {
    let lp = ell / 2.0;
    let delta = 2.0 * std::f64::consts::PI / n as f64;
    let one_minus_cos = 2.0 * (delta / 2.0).sin().powi(2);
    let denom = one_minus_cos * (2.0 - (mu + lp) * eta) + eta * eta * mu * lp;
    U0V0 {
        u0: eta * g * (eta * lp - one_minus_cos) / denom,
        v0: -eta * g * delta.sin() / denom,
        signs_guaranteed: n >= 3 && eta < 2.0 / ell && eta * lp > one_minus_cos,
    }
}
