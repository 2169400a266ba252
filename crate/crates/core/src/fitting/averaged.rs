//! Time-averaged contrast decay with two parallel relaxation pathways.
//!
//! 1/τ_eff = 1/τ₁ + 1/τ₂, and the signal averaged over a collection window
//! [0, T] is ⟨S(T)⟩ = A·(τ_eff/T)·(1 − e^{−T/τ_eff}).

use serde::{Deserialize, Serialize};

use super::lm::levenberg_marquardt;
use super::validate_series;
use crate::error::{require, Error, Result};

/// Fitted τ_eff within this relative distance of τ₁ leaves no meaningful
/// second pathway (τ₂ would exceed 10⁶·τ₁).
pub const TAU_EFF_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedDecayParams {
    pub amplitude: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau_eff: f64,
}

impl AveragedDecayParams {
    pub fn new(amplitude: f64, tau1: f64, tau2: f64) -> Result<Self> {
        require(tau1 > 0.0, "tau1", "must be positive")?;
        require(tau2 > 0.0, "tau2", "must be positive")?;
        Ok(Self {
            amplitude,
            tau1,
            tau2,
            tau_eff: effective_tau(tau1, tau2),
        })
    }
}

/// Harmonic composition of two decay times.
pub fn effective_tau(tau1: f64, tau2: f64) -> f64 {
    1.0 / (1.0 / tau1 + 1.0 / tau2)
}

/// (1 − e^{−x})/x, equal to 1 at x = 0.
#[inline]
fn window_factor(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// d/dx of [`window_factor`].
#[inline]
fn window_factor_deriv(x: f64) -> f64 {
    if x < 1e-3 {
        -0.5 + x / 3.0 - x * x / 8.0 + x * x * x / 30.0
    } else {
        let e = (-x).exp();
        (x * e + (-x).exp_m1()) / (x * x)
    }
}

fn averaged(t: f64, amplitude: f64, tau_eff: f64) -> f64 {
    amplitude * window_factor(t / tau_eff)
}

pub fn averaged_contrast(t: f64, p: &AveragedDecayParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("collection time must be positive, got {t}")));
    }
    Ok(averaged(t, p.amplitude, p.tau_eff))
}

/// Fit (A, τ_eff) to time-averaged contrast, then split off τ₂ using the
/// known τ₁.
pub fn fit_averaged_decay(collection_times: &[f64], values: &[f64], tau1_fixed: f64) -> Result<AveragedDecayParams> {
    require(tau1_fixed > 0.0 && tau1_fixed.is_finite(), "tau1_fixed", "must be positive")?;
    validate_series(collection_times, values, 3)?;
    if collection_times.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Data("collection times must be positive".into()));
    }
    let a0 = values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let t_mid = collection_times[collection_times.len() / 2];
    let sol = levenberg_marquardt(
        collection_times,
        values,
        vec![a0, t_mid],
        |p, t| {
            let x = t / p[1];
            let g = window_factor(x);
            let dg = window_factor_deriv(x);
            (p[0] * g, vec![g, -p[0] * dg * x / p[1]])
        },
        |p| p[1] > 0.0,
    )?;
    // a singular normal matrix means τ_eff is unidentified
    sol.covariance()?;
    let (amplitude, tau_eff) = (sol.params[0], sol.params[1]);
    if tau_eff >= tau1_fixed * (1.0 - TAU_EFF_MARGIN) {
        return Err(Error::InconsistentDecay {
            tau_eff,
            tau1: tau1_fixed,
        });
    }
    let tau2 = 1.0 / (1.0 / tau_eff - 1.0 / tau1_fixed);
    Ok(AveragedDecayParams {
        amplitude,
        tau1: tau1_fixed,
        tau2,
        tau_eff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn effective_tau_examples() {
        let t = effective_tau(12.63e-6, 0.26e-6);
        assert!((t - 0.2548e-6).abs() < 1e-10);
        let p = AveragedDecayParams::new(0.17, 12.63e-6, 0.26e-6).unwrap();
        assert_eq!(1.0 / p.tau_eff, 1.0 / (1.0 / (1.0 / p.tau1 + 1.0 / p.tau2)));
    }

    #[test]
    fn small_window_and_unit_window() {
        let p = AveragedDecayParams::new(0.17, 12.63e-6, 0.56e-6).unwrap();
        let tiny = averaged_contrast(p.tau_eff * 1e-12, &p).unwrap();
        assert_relative_eq!(tiny, 0.17, max_relative = 1e-11);
        // series 1 − x/2 + x²/6 − x³/24 at x = 1e-3
        let x = 1e-3;
        let series = 0.17 * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
        assert_relative_eq!(averaged_contrast(p.tau_eff * x, &p).unwrap(), series, max_relative = 1e-12);
        assert_relative_eq!(
            averaged_contrast(p.tau_eff, &p).unwrap(),
            0.17 * (1.0 - (-1.0f64).exp()),
            max_relative = 1e-14
        );
        assert!(averaged_contrast(0.0, &p).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for x in [1e-5f64, 5e-4, 2e-3, 0.3, 1.0, 7.0] {
            let h = 1e-6 * x.max(1e-3);
            let fd = (window_factor(x + h) - window_factor(x - h)) / (2.0 * h);
            assert!((fd - window_factor_deriv(x)).abs() < 1e-7, "x = {x}");
        }
    }

    fn collection_grid() -> Vec<f64> {
        (1..=25).map(|k| 0.1e-6 * k as f64).collect()
    }

    #[test]
    fn round_trip_tau2() {
        let truth = AveragedDecayParams::new(0.17, 12.63e-6, 0.56e-6).unwrap();
        let t = collection_grid();
        let y: Vec<f64> = t.iter().map(|&t| averaged_contrast(t, &truth).unwrap()).collect();
        let fit = fit_averaged_decay(&t, &y, 12.63e-6).unwrap();
        assert_relative_eq!(fit.tau2, 0.56e-6, max_relative = 0.05);
        assert_relative_eq!(fit.amplitude, 0.17, max_relative = 1e-6);
    }

    #[test]
    fn pure_t1_data_is_inconsistent() {
        let t: Vec<f64> = (1..=25).map(|k| 1e-6 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&t| 0.17 * window_factor(t / 12.63e-6)).collect();
        match fit_averaged_decay(&t, &y, 12.63e-6) {
            Err(Error::InconsistentDecay { tau_eff, tau1 }) => {
                assert_relative_eq!(tau_eff, tau1, max_relative = 1e-6);
            }
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn constant_data_fails() {
        let t = collection_grid();
        assert!(matches!(fit_averaged_decay(&t, &vec![0.1; t.len()], 12.63e-6), Err(Error::FitFailure(_))));
    }

    proptest! {
        #[test]
        fn strictly_decreasing_in_window(t in 1e-9f64..1e-5, k in 1.01f64..10.0, tau2 in 1e-7f64..1e-5) {
            let p = AveragedDecayParams::new(0.1, 12.63e-6, tau2).unwrap();
            let a = averaged_contrast(t, &p).unwrap();
            let b = averaged_contrast(t * k, &p).unwrap();
            prop_assert!(b < a);
            prop_assert!(a < 0.1);
        }

        #[test]
        fn tau_eff_below_both(t1 in 1e-7f64..1e-4, t2 in 1e-8f64..1e-4) {
            let te = effective_tau(t1, t2);
            prop_assert!(te < t1.min(t2));
        }
    }
}
