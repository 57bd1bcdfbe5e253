use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(rename = "K_values")]
    pub k_values: Vec<usize>,
    pub gaps: Vec<f64>,
    pub log_log_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of log(gap) on log(K).
pub fn rate_fit(k_list: &[usize], gaps: &[f64]) -> Result<RateFit> {
    if k_list.len() != gaps.len() {
        return Err(LabError::RateFit(format!(
            "{} K values but {} gaps",
            k_list.len(),
            gaps.len()
        )));
    }
    if k_list.len() < 3 {
        return Err(LabError::RateFit(format!(
            "need at least 3 points, got {}",
            k_list.len()
        )));
    }
    if let Some(&k) = k_list.iter().find(|&&k| k == 0) {
        return Err(LabError::RateFit(format!("K = {k} has no logarithm")));
    }
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(LabError::RateFit(format!(
            "gap {g:e} is not positive and finite"
        )));
    }
    let xs: Vec<f64> = k_list.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::RateFit("all K values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(RateFit {
        k_values: k_list.to_vec(),
        gaps: gaps.to_vec(),
        log_log_slope: slope,
        intercept,
        r_squared,
    })
}
