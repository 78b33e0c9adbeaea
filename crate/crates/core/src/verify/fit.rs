//! Least-squares growth fits.

use serde::Serialize;

use crate::error::{Error, Result};

/// `y ≈ intercept + slope·x` with the standard error of the slope and the
/// root-mean-square residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub residual: f64,
}

impl Fit {
    /// Positive slope even after subtracting one standard error.
    pub fn grows(&self) -> bool {
        self.slope - self.stderr > 0.0
    }
}

pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Precondition(format!(
            "growth fits need at least 3 points, got {}",
            x.len().min(y.len())
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("growth fit over non-finite values".into()));
    }
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("growth fit over a single abscissa".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok(Fit {
        slope,
        intercept,
        stderr: (sse / (k - 2.0) / sxx).sqrt(),
        residual: (sse / k).sqrt(),
    })
}

/// Fit of `log y` against `log x`; the slope is the growth exponent.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<Fit> {
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_linear(&lx, &ly)
}
