//! Quadratic-phase chirp synthesis.
//!
//! The baseband phase φ(t) = −(Δω/2)t + (Δω/2T)t² sweeps the instantaneous
//! frequency linearly from −Δf/2 to +Δf/2; I = cos φ, Q = −sin φ encode
//! e^{−jφ}. Upconversion adds the carrier f0.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};

/// Minimum oversampling of the chirp bandwidth accepted by [`generate_iq`].
pub const MIN_OVERSAMPLING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChirpSpec {
    /// Carrier, Hz.
    pub f0: f64,
    /// Sweep bandwidth Δf, Hz.
    pub delta_f: f64,
    /// Ramp duration T, s.
    pub duration: f64,
}

impl Default for ChirpSpec {
    fn default() -> Self {
        Self {
            f0: 3.2e9,
            delta_f: 200e6,
            duration: 1.67e-6,
        }
    }
}

impl ChirpSpec {
    pub fn validate(&self) -> Result<()> {
        require(self.f0.is_finite(), "f0", "must be finite")?;
        require(
            self.delta_f >= 0.0 && self.delta_f.is_finite(),
            "delta_f",
            "must be non-negative",
        )?;
        require(
            self.duration > 0.0 && self.duration.is_finite(),
            "duration",
            "must be positive",
        )
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t:e} s lies outside the ramp [0, {:e}] s",
                self.duration
            )))
        }
    }

    #[inline]
    fn phase_unchecked(&self, t: f64) -> f64 {
        let dw = TAU * self.delta_f;
        // −(Δω/2)t + (Δω/2T)t², factored to keep φ(T) = 0 exact
        0.5 * dw * t * (t / self.duration - 1.0)
    }

    #[inline]
    fn baseband_unchecked(&self, t: f64) -> f64 {
        self.delta_f * (t / self.duration - 0.5)
    }

    /// Smallest sample rate accepted by [`generate_iq`].
    pub fn min_sample_rate(&self) -> f64 {
        MIN_OVERSAMPLING * self.delta_f
    }
}

/// Baseband phase in radians.
pub fn chirp_phase(t: f64, spec: &ChirpSpec) -> Result<f64> {
    spec.check_time(t)?;
    Ok(spec.phase_unchecked(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousFrequency {
    /// Baseband sweep frequency, Hz.
    pub baseband: f64,
    /// Upconverted frequency f0 + baseband, Hz.
    pub output: f64,
}

pub fn instantaneous_frequency(t: f64, spec: &ChirpSpec) -> Result<InstantaneousFrequency> {
    spec.check_time(t)?;
    let baseband = spec.baseband_unchecked(t);
    Ok(InstantaneousFrequency {
        baseband,
        output: spec.f0 + baseband,
    })
}

/// Sampled I/Q arrays; sample `n` is taken at `n / sample_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqWaveform {
    pub sample_rate: f64,
    pub i: Vec<f64>,
    pub q: Vec<f64>,
}

impl IqWaveform {
    pub fn len(&self) -> usize {
        self.i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.i.is_empty()
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|n| self.time(n))
    }

    /// Largest |i² + q² − 1| over all samples.
    pub fn max_modulus_error(&self) -> f64 {
        self.i
            .iter()
            .zip(&self.q)
            .map(|(i, q)| (i * i + q * q - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Number of samples on `[0, T]` at `rate`: floor(T·rate) + 1.
///
/// A product within a few ulps of an integer counts as that integer, so
/// T = 1.67 µs at 4 GS/s yields exactly 6681 samples.
pub fn sample_count(duration: f64, rate: f64) -> usize {
    let x = duration * rate;
    let r = x.round();
    let last = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.floor() };
    last as usize + 1
}

pub fn generate_iq(spec: &ChirpSpec, sample_rate: f64) -> Result<IqWaveform> {
    spec.validate()?;
    require(
        sample_rate > 0.0 && sample_rate.is_finite(),
        "sample_rate",
        "must be positive",
    )?;
    let required = spec.min_sample_rate();
    if sample_rate < required {
        return Err(Error::Undersampled {
            requested: sample_rate,
            required,
        });
    }
    let n = sample_count(spec.duration, sample_rate);
    let (i, q) = (0..n)
        .map(|k| {
            let t = (k as f64 / sample_rate).min(spec.duration);
            let (s, c) = spec.phase_unchecked(t).sin_cos();
            (c, -s)
        })
        .unzip();
    Ok(IqWaveform { sample_rate, i, q })
}
