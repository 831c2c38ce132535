//! Least-squares power-law fits on log-log data.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `log err = intercept + slope · log k`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    let usable = pairs.iter().filter(|(k, e)| *k > 0.0 && *e > 0.0 && e.is_finite()).count();
    if pairs.len() < 3 || usable != pairs.len() {
        return Err(Error::InsufficientData(usable));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        pairs: pairs.to_vec(),
        slope,
        intercept,
        r2,
    })
}
