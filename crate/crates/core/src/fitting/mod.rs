//! Contrast extraction, normalization and parameter estimation for ramp
//! experiments and relaxometry.

mod averaged;
mod decay;
mod joint;
mod lm;

pub use averaged::{averaged_contrast, effective_tau, fit_averaged_decay, AveragedDecayParams, TAU_EFF_MARGIN};
pub use decay::{fit_exponential_decay, fit_exponential_decay_with, DecayFitOptions, DecayFitResult};
pub use joint::{
    initial_params, joint_fit, joint_fit_from, joint_objective, DatasetFit, JointFitConfig, JointFitResult, JointParams, LindbladModel,
    TransitionModel,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional fluorescence contrast (I_off − I_on)/I_off.
pub fn contrast(i_off: f64, i_on: f64) -> Result<f64> {
    if !(i_off > 0.0) || !i_off.is_finite() || !i_on.is_finite() {
        return Err(Error::Domain(format!(
            "contrast needs a positive reference intensity, got I_off = {i_off}"
        )));
    }
    Ok((i_off - i_on) / i_off)
}

/// Contrast versus per-ramp time for one drive setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDataset {
    pub label: String,
    /// Per-ramp times, s, strictly increasing.
    pub ramp_times: Vec<f64>,
    pub contrast: Vec<f64>,
    /// Exactly one dataset in a joint fit is the normalization reference.
    #[serde(default)]
    pub is_reference: bool,
    /// AWG gain setting, used to seed the Rabi frequency when known.
    #[serde(default)]
    pub gain: Option<u32>,
}

impl ExperimentDataset {
    pub fn validate(&self) -> Result<()> {
        if self.ramp_times.len() != self.contrast.len() {
            return Err(Error::Data(format!(
                "dataset '{}': {} ramp times but {} contrast values",
                self.label,
                self.ramp_times.len(),
                self.contrast.len()
            )));
        }
        if self.ramp_times.is_empty() {
            return Err(Error::Data(format!("dataset '{}' is empty", self.label)));
        }
        if let Some(k) = self.ramp_times.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Data(format!(
                "dataset '{}': ramp time at row {k} must be positive",
                self.label
            )));
        }
        if let Some(k) = self.ramp_times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!(
                "dataset '{}': ramp times not strictly increasing at row {}",
                self.label,
                k + 1
            )));
        }
        if let Some(k) = self.contrast.iter().position(|c| !c.is_finite()) {
            return Err(Error::Data(format!(
                "dataset '{}': non-finite contrast at row {k}",
                self.label
            )));
        }
        Ok(())
    }

    pub fn max_contrast(&self) -> f64 {
        self.contrast.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Divide every dataset by the maximum contrast of the single reference
/// dataset. Applying it twice is the same as applying it once, and scaling
/// all inputs by a common factor does not change the output.
pub fn normalize_by_reference(datasets: &[ExperimentDataset]) -> Result<Vec<ExperimentDataset>> {
    let refs: Vec<_> = datasets.iter().filter(|d| d.is_reference).collect();
    let reference = match refs.as_slice() {
        [r] => *r,
        [] => return Err(Error::Data("no reference dataset".into())),
        _ => return Err(Error::Data(format!("{} datasets marked as reference", refs.len()))),
    };
    for d in datasets {
        d.validate()?;
    }
    let scale = reference.max_contrast();
    if !(scale > 0.0) {
        return Err(Error::Data(format!(
            "reference dataset '{}' has no positive contrast",
            reference.label
        )));
    }
    Ok(datasets
        .iter()
        .map(|d| ExperimentDataset {
            contrast: d.contrast.iter().map(|c| c / scale).collect(),
            ..d.clone()
        })
        .collect())
}

/// Shared checks for one-dimensional series fits.
pub(crate) fn validate_series(times: &[f64], values: &[f64], min_points: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::Data(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < min_points {
        return Err(Error::Data(format!(
            "need at least {min_points} points, got {}",
            times.len()
        )));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite sample".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Data("times must be strictly increasing".into()));
    }
    if values.iter().all(|v| *v == values[0]) {
        return Err(Error::FitFailure("all values are equal".into()));
    }
    Ok(())
}
