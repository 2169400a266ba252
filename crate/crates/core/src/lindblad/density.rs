use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2×2 complex matrix, row-major.
pub type Operator2 = [[Complex64; 2]; 2];

/// Two-level density matrix. Index 0 is the ground state, index 1 the
/// excited (target) state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub rho00: Complex64,
    pub rho01: Complex64,
    pub rho10: Complex64,
    pub rho11: Complex64,
}

pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-10;

impl DensityMatrix {
    pub fn ground() -> Self {
        Self::from_populations(1.0, 0.0)
    }

    pub fn excited() -> Self {
        Self::from_populations(0.0, 1.0)
    }

    fn from_populations(p0: f64, p1: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            rho00: Complex64::new(p0, 0.0),
            rho01: z,
            rho10: z,
            rho11: Complex64::new(p1, 0.0),
        }
    }

    /// From the affine Bloch vector `[c, x, y, z]`, ρ = (c·I + x σx + y σy + z σz)/2.
    pub fn from_bloch(v: &[f64; 4]) -> Self {
        let [c, x, y, z] = *v;
        Self {
            rho00: Complex64::new(0.5 * (c + z), 0.0),
            rho01: Complex64::new(0.5 * x, -0.5 * y),
            rho10: Complex64::new(0.5 * x, 0.5 * y),
            rho11: Complex64::new(0.5 * (c - z), 0.0),
        }
    }

    /// Affine Bloch vector of the Hermitian part.
    pub fn to_bloch(&self) -> [f64; 4] {
        let off = 0.5 * (self.rho01 + self.rho10.conj());
        [
            (self.rho00 + self.rho11).re,
            2.0 * off.re,
            -2.0 * off.im,
            (self.rho00 - self.rho11).re,
        ]
    }

    pub fn from_matrix(m: &Operator2) -> Self {
        Self {
            rho00: m[0][0],
            rho01: m[0][1],
            rho10: m[1][0],
            rho11: m[1][1],
        }
    }

    pub fn as_matrix(&self) -> Operator2 {
        [[self.rho00, self.rho01], [self.rho10, self.rho11]]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho00 + self.rho11
    }

    pub fn excited_population(&self) -> f64 {
        self.rho11.re
    }

    pub fn coherence_magnitude(&self) -> f64 {
        self.rho01.norm()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        (self.rho00 * self.rho00 + self.rho01 * self.rho10 + self.rho10 * self.rho01 + self.rho11 * self.rho11).re
    }

    /// Largest deviation from ρ = ρ†.
    pub fn hermiticity_residual(&self) -> f64 {
        (self.rho10 - self.rho01.conj())
            .norm()
            .max(self.rho00.im.abs())
            .max(self.rho11.im.abs())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [c, x, y, z] = self.to_bloch();
        let r = (x * x + y * y + z * z).sqrt();
        [0.5 * (c - r), 0.5 * (c + r)]
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_residual();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("not Hermitian (residual {herm:e})"),
            });
        }
        let tr = self.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("trace {tr} differs from 1"),
            });
        }
        let lo = self.eigenvalues()[0];
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter {
                field: "rho",
                reason: format!("negative eigenvalue {lo:e}"),
            });
        }
        Ok(())
    }
}
