//! Closed-form Landau-Zener and Stückelberg expressions, adiabaticity
//! bookkeeping and π-pulse conversions.
//!
//! # Unit audit
//!
//! Public inputs are cyclic: `rabi` is Ω/2π in Hz and `delta_f` is in Hz.
//! Internally Ω = 2π·rabi (rad/s) and the sweep rate α = 2π·Δf/T (rad/s²)
//! is the rate of change of the angular detuning A(t).
//!
//! The simulated Hamiltonian is H/ħ = −(Ω/2)σx + (A(t)/2)σz. Its diabatic
//! energies differ by A(t) and its off-diagonal coupling is g = Ω/2, so the
//! textbook single-passage result is
//!
//! ```text
//! P = 1 − exp(−2π g² / α) = 1 − exp(−π Ω² / (2α)).
//! ```
//!
//! Writing the formula as 1 − exp(−2πΩ²/α) with Ω the full Rabi
//! frequency overstates the exponent by a factor of four and disagrees with
//! the numerical engine. [`p_lz`] therefore uses the coupling form, and
//! [`adiabaticity`] reports the conventional bookkeeping number 2πΩ²/α, so
//! `p_lz = 1 − exp(−adiabaticity / 4)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    /// Ω/2π, Hz.
    pub rabi: f64,
    /// Sweep span, Hz.
    pub delta_f: f64,
    /// Sweep duration, s.
    pub sweep_time: f64,
}

impl SweepParams {
    pub fn validate(&self) -> Result<()> {
        require(self.rabi >= 0.0 && self.rabi.is_finite(), "rabi", "must be non-negative")?;
        require(self.delta_f >= 0.0 && self.delta_f.is_finite(), "delta_f", "must be non-negative")?;
        require(self.sweep_time > 0.0 && self.sweep_time.is_finite(), "sweep_time", "must be positive")
    }

    /// α = 2πΔf/T in rad/s².
    pub fn sweep_rate(&self) -> f64 {
        sweep_rate(self.delta_f, self.sweep_time)
    }

    pub fn adiabaticity(&self) -> f64 {
        adiabaticity(self.rabi, self.sweep_rate())
    }

    pub fn p_lz(&self) -> Result<f64> {
        p_lz(self.rabi, self.sweep_rate())
    }
}

/// α = 2πΔf/T in rad/s².
pub fn sweep_rate(delta_f: f64, sweep_time: f64) -> f64 {
    TAU * delta_f / sweep_time
}

/// 2πΩ²/α with Ω = 2π·rabi.
pub fn adiabaticity(rabi: f64, alpha: f64) -> f64 {
    let omega = TAU * rabi;
    TAU * omega * omega / alpha
}

/// Inverse of [`adiabaticity`] in the sweep time: the T giving a target
/// adiabaticity for fixed Ω and Δf.
pub fn sweep_time_for_adiabaticity(rabi: f64, delta_f: f64, target: f64) -> f64 {
    let omega = TAU * rabi;
    target * delta_f / (omega * omega)
}

/// Single-passage adiabatic transfer probability (see the module unit audit).
pub fn p_lz(rabi: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("sweep rate must be positive, got {alpha}")));
    }
    if !(rabi >= 0.0) {
        return Err(Error::Domain(format!("rabi must be non-negative, got {rabi}")));
    }
    let omega = TAU * rabi;
    Ok(-(-PI * omega * omega / (2.0 * alpha)).exp_m1())
}

/// Coherent double passage: 4p(1−p)·sin²(φ/2).
pub fn p2_coherent(p: f64, phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    4.0 * p * (1.0 - p) * s * s
}

/// Double passage with a dephasing envelope over the time between crossings:
/// 2p(1−p)·[1 − e^{−t/T₂} cos φ].
pub fn p2_dephased(p: f64, phi: f64, t_between: f64, t2: f64) -> f64 {
    let envelope = if t_between == 0.0 { 1.0 } else { (-t_between / t2).exp() };
    2.0 * p * (1.0 - p) * (1.0 - envelope * phi.cos())
}

/// Fully dephased double passage, 2p(1−p).
pub fn p2_strong_dephasing(p: f64) -> f64 {
    2.0 * p * (1.0 - p)
}

/// Resonant π-pulse length 1/(2·rabi).
pub fn pi_pulse_duration(rabi: f64) -> Result<f64> {
    if !(rabi > 0.0) || !rabi.is_finite() {
        return Err(Error::Domain(format!("rabi must be positive, got {rabi}")));
    }
    Ok(0.5 / rabi)
}

/// Rabi frequency implied by a π-pulse length.
pub fn nominal_rabi(pi_len: f64) -> Result<f64> {
    if !(pi_len > 0.0) || !pi_len.is_finite() {
        return Err(Error::Domain(format!("pi-pulse length must be positive, got {pi_len}")));
    }
    Ok(0.5 / pi_len)
}

/// Measured π-pulse lengths by microwave gain setting.
pub const PI_PULSE_TABLE: [(u32, f64); 5] = [
    (30000, 38e-9),
    (25000, 40e-9),
    (20000, 48e-9),
    (15000, 60e-9),
    (10000, 96e-9),
];

pub fn pi_pulse_for_gain(gain: u32) -> Option<f64> {
    PI_PULSE_TABLE.iter().find(|(g, _)| *g == gain).map(|(_, t)| *t)
}

/// Ω_nominal/2π for a tabulated gain.
pub fn nominal_rabi_for_gain(gain: u32) -> Option<f64> {
    pi_pulse_for_gain(gain).map(|t| 0.5 / t)
}
