//! Exact final iterates of IGD on the scalar constructions.
//!
//! Component layouts (1-based as in the formulas, 0-based in code):
//! * two-type, n even: `a/2·x² + Gx` for i ≤ n/2, `a/2·x² − Gx` after.
//! * three-type, n odd: `a/2·x²` first, then (n−1)/2 of `+Gx`, then `−Gx`.
//! * concave epoch, n even: `a/2·x² + Gx` for i ≤ n/2, `−a/4·x² − Gx` after.
//! * large concave, n ≡ 0 mod 4: blocks `Gx`, `L/2·x²`, `−Gx`, `−(L−4μ)/2·x²`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Denominators below this in absolute value are refused.
pub const DENOMINATOR_GUARD: f64 = 1e-14;
/// Exponents above this switch to exp/log when the base is within
/// [`NEAR_ONE`] of ±1.
pub const LARGE_EXPONENT: u64 = 1_000_000;
pub const NEAR_ONE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub a: f64,
    pub g: f64,
    pub n: usize,
    pub eta: f64,
    pub epochs: usize,
    pub x0: f64,
}

/// `base^m` by repeated squaring, or `sign·exp(m·ln|base|)` for huge `m`
/// with `|base|` near 1.
pub fn powu(base: f64, m: u64) -> f64 {
    if m > LARGE_EXPONENT && (base.abs() - 1.0).abs() < NEAR_ONE {
        let sign = if base < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
        return sign * (m as f64 * base.abs().ln()).exp();
    }
    let mut result = 1.0;
    let mut b = base;
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}

fn guard(value: f64, what: &str) -> Result<f64> {
    if value.abs() < DENOMINATOR_GUARD {
        return Err(LabError::Oracle(format!(
            "{what} = {value:e} is below the {DENOMINATOR_GUARD:e} guard"
        )));
    }
    Ok(value)
}

fn nonzero_curvature(a: f64) -> Result<()> {
    if a == 0.0 {
        return Err(LabError::Oracle(
            "curvature a = 0; the formula divides by a".into(),
        ));
    }
    Ok(())
}

pub fn closed_form_twotype(p: &OracleParams) -> Result<f64> {
    nonzero_curvature(p.a)?;
    if p.n % 2 != 0 || p.n == 0 {
        return Err(LabError::Oracle(format!(
            "two-type oracle needs even n, got {}",
            p.n
        )));
    }
    let c = 1.0 - p.eta * p.a;
    let r = powu(c, (p.n / 2) as u64);
    let t = powu(c, (p.n * p.epochs) as u64);
    let denom = guard(1.0 + r, "1 + (1 − ηa)^{n/2}")?;
    Ok(t * p.x0 + (p.g / p.a) * ((1.0 - r) / denom) * (1.0 - t))
}

/// K → ∞ limit of the two-type oracle when |1 − ηa| < 1.
pub fn twotype_fixed_point(a: f64, g: f64, n: usize, eta: f64) -> Result<f64> {
    nonzero_curvature(a)?;
    let r = powu(1.0 - eta * a, (n / 2) as u64);
    Ok((g / a) * (1.0 - r) / guard(1.0 + r, "1 + (1 − ηa)^{n/2}")?)
}

pub fn closed_form_threetype(p: &OracleParams) -> Result<f64> {
    nonzero_curvature(p.a)?;
    if p.n % 2 != 1 || p.n < 3 {
        return Err(LabError::Oracle(format!(
            "three-type oracle needs odd n ≥ 3, got {}",
            p.n
        )));
    }
    let c = 1.0 - p.eta * p.a;
    let t = powu(c, (p.n * p.epochs) as u64);
    let denom = guard(1.0 - powu(c, p.n as u64), "1 − (1 − ηa)^n")?;
    let half = 1.0 - powu(c, ((p.n - 1) / 2) as u64);
    Ok(t * p.x0 + (p.g / p.a) * ((1.0 - t) / denom) * half * half)
}

/// One epoch x_0^k → x_0^{k+1} of the concave construction.
pub fn closed_form_concave_epoch(a: f64, g: f64, n: usize, eta: f64, xk: f64) -> Result<f64> {
    nonzero_curvature(a)?;
    if n % 2 != 0 || n == 0 {
        return Err(LabError::Oracle(format!(
            "concave oracle needs even n, got {n}"
        )));
    }
    let m = (n / 2) as u64;
    let up = powu(1.0 + eta * a / 2.0, m);
    let down = powu(1.0 - eta * a, m);
    Ok(up * down * xk + (g / a) * (up * (1.0 + down) - 2.0))
}

/// The concave epoch map applied `epochs` times.
pub fn concave_final(p: &OracleParams) -> Result<f64> {
    let mut x = p.x0;
    for _ in 0..p.epochs {
        x = closed_form_concave_epoch(p.a, p.g, p.n, p.eta, x)?;
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PQ {
    /// (1 − ηL)^{n/4}
    pub p: f64,
    /// (1 + η(L − 4μ))^{n/4}
    pub q: f64,
}

pub fn large_concave_pq(mu: f64, ell: f64, n: usize, eta: f64) -> Result<PQ> {
    if n % 4 != 0 || n == 0 {
        return Err(LabError::Oracle(format!(
            "large concave map needs n ≡ 0 (mod 4), got {n}"
        )));
    }
    let m = (n / 4) as u64;
    Ok(PQ {
        p: powu(1.0 - eta * ell, m),
        q: powu(1.0 + eta * (ell - 4.0 * mu), m),
    })
}

pub fn large_concave_epoch_map(
    mu: f64,
    ell: f64,
    n: usize,
    eta: f64,
    g: f64,
    xk: f64,
) -> Result<f64> {
    let PQ { p, q } = large_concave_pq(mu, ell, n, eta)?;
    Ok(p * q * xk + q * (1.0 - p) * eta * n as f64 * g / 4.0)
}

/// (pq)^K x0 + (1 − (pq)^K)/(1 − pq) · q(1 − p)ηnG/4.
pub fn large_concave_final(
    mu: f64,
    ell: f64,
    n: usize,
    eta: f64,
    g: f64,
    epochs: usize,
    x0: f64,
) -> Result<f64> {
    let PQ { p, q } = large_concave_pq(mu, ell, n, eta)?;
    let pq = p * q;
    let pk = powu(pq, epochs as u64);
    let denom = guard(1.0 - pq, "1 − pq")?;
    Ok(pk * x0 + (1.0 - pk) / denom * q * (1.0 - p) * eta * n as f64 * g / 4.0)
}
