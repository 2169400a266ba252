//! Static spin-system arithmetic: ground-state transition frequencies, the
//! field needed to place a transition, hyperfine line centers and composite
//! Lorentzian ODMR spectra. All frequencies are in Hz.

use serde::{Deserialize, Serialize};

use crate::error::{require, Error, Result};

/// Ground-state spin Hamiltonian constants reduced to what the two-level
/// model needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSystemParams {
    /// Zero-field splitting D/h, Hz.
    pub d_gs: f64,
    /// Transverse zero-field splitting E/h, Hz.
    pub e_gs: f64,
    /// Electron gyromagnetic ratio γ/2π, Hz/T.
    pub gamma_e: f64,
    /// Applied field, T.
    pub b0: f64,
    /// Hyperfine line spacing A/h, Hz.
    pub hyperfine_spacing: f64,
    pub n_hyperfine: usize,
}

impl Default for SpinSystemParams {
    fn default() -> Self {
        Self {
            d_gs: 3.48e9,
            e_gs: 50e6,
            gamma_e: 28.024e9,
            b0: 0.0,
            hyperfine_spacing: 64e6,
            n_hyperfine: 4,
        }
    }
}

impl SpinSystemParams {
    pub fn validate(&self) -> Result<()> {
        require(self.d_gs > 0.0 && self.d_gs.is_finite(), "d_gs", "must be positive")?;
        require(self.e_gs >= 0.0 && self.e_gs.is_finite(), "e_gs", "must be non-negative")?;
        require(self.gamma_e > 0.0 && self.gamma_e.is_finite(), "gamma_e", "must be positive")?;
        require(self.b0 >= 0.0 && self.b0.is_finite(), "b0", "must be non-negative")?;
        require(
            self.hyperfine_spacing > 0.0 && self.hyperfine_spacing.is_finite(),
            "hyperfine_spacing",
            "must be positive",
        )?;
        require(self.n_hyperfine >= 1, "n_hyperfine", "must be at least 1")
    }

    /// `(f_plus, f_minus)` for the |0> <-> |±1> transitions.
    pub fn transition_frequencies(&self) -> (f64, f64) {
        transition_frequencies(self)
    }
}

/// f± = D ± sqrt(E² + (γB)²).
///
/// `f_plus + f_minus == 2 D` holds bit-exactly since both share the same
/// rounded square root.
pub fn transition_frequencies(p: &SpinSystemParams) -> (f64, f64) {
    let split = p.e_gs.hypot(p.gamma_e * p.b0);
    (p.d_gs + split, p.d_gs - split)
}

/// Field at which the lower transition sits at `f_minus_target`.
pub fn field_for_transition(p: &SpinSystemParams, f_minus_target: f64) -> Result<f64> {
    let ceiling = p.d_gs - p.e_gs;
    if !f_minus_target.is_finite() || f_minus_target > ceiling {
        return Err(Error::Domain(format!(
            "f_minus target {f_minus_target} Hz exceeds the zero-field value D - E = {ceiling} Hz"
        )));
    }
    let split = p.d_gs - f_minus_target;
    // split >= e_gs here, so the radicand is non-negative up to rounding.
    let zeeman = (split * split - p.e_gs * p.e_gs).max(0.0).sqrt();
    Ok(zeeman / p.gamma_e)
}

/// `n` equally spaced centers, symmetric about `f_center`.
pub fn hyperfine_centers(f_center: f64, spacing: f64, n: usize) -> Vec<f64> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|k| f_center + (k as f64 - mid) * spacing).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianLine {
    pub center: f64,
    pub fwhm: f64,
    pub amplitude: f64,
}

impl LorentzianLine {
    pub fn new(center: f64, fwhm: f64, amplitude: f64) -> Result<Self> {
        let line = Self {
            center,
            fwhm,
            amplitude,
        };
        line.validate()?;
        Ok(line)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.center.is_finite(), "center", "must be finite")?;
        require(self.fwhm > 0.0 && self.fwhm.is_finite(), "fwhm", "must be positive")?;
        require(
            self.amplitude >= 0.0 && self.amplitude.is_finite(),
            "amplitude",
            "must be non-negative",
        )
    }

    #[inline]
    pub fn value_at(&self, f: f64) -> f64 {
        let hw2 = 0.25 * self.fwhm * self.fwhm;
        let d = f - self.center;
        self.amplitude * hw2 / (d * d + hw2)
    }
}

/// Equal-amplitude, equal-width lines at the hyperfine centers.
pub fn hyperfine_lines(
    f_center: f64,
    spacing: f64,
    n: usize,
    fwhm: f64,
    amplitude: f64,
) -> Result<Vec<LorentzianLine>> {
    hyperfine_centers(f_center, spacing, n)
        .into_iter()
        .map(|c| LorentzianLine::new(c, fwhm, amplitude))
        .collect()
}

/// Sum of Lorentzians evaluated on `freqs`.
pub fn synthesize_odmr_spectrum(lines: &[LorentzianLine], freqs: &[f64]) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| lines.iter().map(|l| l.value_at(f)).sum())
        .collect()
}
