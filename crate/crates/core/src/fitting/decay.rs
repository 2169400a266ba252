//! Single-exponential relaxometry fit with covariance-based uncertainty.

use serde::{Deserialize, Serialize};

use super::lm::levenberg_marquardt;
use super::validate_series;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayFitOptions {
    /// Fit A·e^{−t/τ} + c instead of the bare exponential.
    pub with_offset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitResult {
    pub amplitude: f64,
    /// Decay time, s.
    pub tau: f64,
    /// One standard deviation of `tau`.
    pub sigma_tau: f64,
    pub sigma_amplitude: f64,
    pub offset: Option<f64>,
    /// sqrt of the residual sum of squares.
    pub residual_norm: f64,
}

pub fn fit_exponential_decay(times: &[f64], values: &[f64]) -> Result<DecayFitResult> {
    fit_exponential_decay_with(times, values, DecayFitOptions::default())
}

/// Log-linear least squares on the positive samples.
fn initial_guess(times: &[f64], values: &[f64]) -> (f64, f64) {
    let span = times[times.len() - 1] - times[0];
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
        let slope = sxy / sxx;
        if slope < 0.0 && slope.is_finite() {
            return ((my - slope * mt).exp(), -1.0 / slope);
        }
    }
    (values[0], 0.5 * span.max(f64::MIN_POSITIVE))
}

pub fn fit_exponential_decay_with(
    times: &[f64],
    values: &[f64],
    opts: DecayFitOptions,
) -> Result<DecayFitResult> {
    validate_series(times, values, 3)?;
    let (a0, tau0) = initial_guess(times, values);
    let mut init = vec![a0, tau0];
    if opts.with_offset {
        init.push(0.0);
    }
    let sol = levenberg_marquardt(
        times,
        values,
        init,
        |p, t| {
            let e = (-t / p[1]).exp();
            let mut g = vec![e, p[0] * t / (p[1] * p[1]) * e];
            let mut f = p[0] * e;
            if p.len() == 3 {
                f += p[2];
                g.push(1.0);
            }
            (f, g)
        },
        |p| p[1] > 0.0,
    )?;
    let tau = sol.params[1];
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::FitFailure(format!("non-positive decay time {tau}")));
    }
    let cov = sol.covariance()?;
    Ok(DecayFitResult {
        amplitude: sol.params[0],
        tau,
        sigma_tau: cov[(1, 1)].max(0.0).sqrt(),
        sigma_amplitude: cov[(0, 0)].max(0.0).sqrt(),
        offset: opts.with_offset.then(|| sol.params[2]),
        residual_norm: sol.sse.sqrt(),
    })
}
