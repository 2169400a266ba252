//! Open-system evolution of the swept two-level system.
//!
//! H(t)/ħ = −(Ω/2)σx + (A(t)/2)σz with Ω = 2π·rabi and A(t) the angular
//! detuning ramp. Dissipation uses C₁ = √γ₁ σ₋ (decay to the ground state)
//! and C₃ = √γ₂ σz with γ₁ = 1/T₁, γ₂ = 1/T₂ − 1/(2T₁); there is no upward
//! (thermal) channel.
//!
//! The state is propagated as the affine Bloch vector `[c, x, y, z]` with
//! ρ = (c·I + x σx + y σy + z σz)/2, which keeps ρ Hermitian by
//! construction. In these coordinates the master equation reads
//!
//! ```text
//! ċ = 0
//! ẋ = −A y − Γ x
//! ẏ =  A x + Ω z − Γ y
//! ż = −Ω y + γ₁ (c − z)
//! ```
//!
//! with transverse rate Γ = γ₁/2 + 2γ₂ (σz dephasing removes coherence at
//! twice its rate).

mod density;
pub(crate) mod integrator;
mod scan;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use density::{DensityMatrix, Operator2, HERMITICITY_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use scan::{locate_peak, scan_sweep_times, Peak, PeakSearch};

use crate::error::{require, Error, Result};
use integrator::Dopri5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationParams {
    /// Longitudinal relaxation time, s. `f64::INFINITY` disables decay.
    pub t1: f64,
    /// Total dephasing time, s. `f64::INFINITY` together with an infinite
    /// `t1` gives a closed system.
    pub t2: f64,
}

impl RelaxationParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        let r = Self { t1, t2 };
        r.validate()?;
        Ok(r)
    }

    pub fn closed() -> Self {
        Self {
            t1: f64::INFINITY,
            t2: f64::INFINITY,
        }
    }

    /// From γ₁ = 1/T₁ and the pure-dephasing rate γ₂.
    pub fn from_rates(gamma1: f64, gamma2: f64) -> Result<Self> {
        require(gamma1 >= 0.0 && gamma1.is_finite(), "gamma1", "must be non-negative")?;
        require(gamma2 >= 0.0 && gamma2.is_finite(), "gamma2", "must be non-negative")?;
        Self::new(1.0 / gamma1, 1.0 / (gamma2 + 0.5 * gamma1))
    }

    pub fn validate(&self) -> Result<()> {
        require(self.t1 > 0.0 && !self.t1.is_nan(), "t1", "must be positive")?;
        require(self.t2 > 0.0 && !self.t2.is_nan(), "t2", "must be positive")?;
        require(
            self.t2 <= 2.0 * self.t1 * (1.0 + 1e-12),
            "t2",
            format!("T2 = {:e} s exceeds 2·T1 = {:e} s", self.t2, 2.0 * self.t1),
        )
    }

    pub fn gamma1(&self) -> f64 {
        1.0 / self.t1
    }

    /// Pure-dephasing rate 1/T₂ − 1/(2T₁), clamped at zero.
    pub fn gamma2(&self) -> f64 {
        (1.0 / self.t2 - 0.5 / self.t1).max(0.0)
    }

    /// Decay rate of |ρ01| from both channels, γ₁/2 + 2γ₂.
    pub fn coherence_decay_rate(&self) -> f64 {
        0.5 * self.gamma1() + 2.0 * self.gamma2()
    }
}

/// Sweep direction of consecutive ramps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Every ramp runs low → high; the detuning jumps back at each boundary.
    #[default]
    Same,
    /// Odd-numbered ramps run high → low.
    Alternating,
}

/// Placement of the ramp relative to resonance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningConvention {
    /// A(τ) = 2πΔf(τ/T − 1/2): resonance crossed at mid-ramp.
    #[default]
    Symmetric,
    /// A(τ) = 2πΔf·τ/T: resonance at the start of the ramp.
    CrossingAtStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveProtocol {
    /// Effective coupling Ω/2π, Hz.
    pub rabi: f64,
    /// Ramp span, Hz.
    pub delta_f: f64,
    /// Duration of one ramp, s.
    pub sweep_time: f64,
    #[serde(default = "one")]
    pub n_sweeps: usize,
    #[serde(default)]
    pub direction: SweepDirection,
    #[serde(default)]
    pub detuning: DetuningConvention,
}

fn one() -> usize {
    1
}

impl DriveProtocol {
    /// Single symmetric ramp.
    pub fn single(rabi: f64, delta_f: f64, sweep_time: f64) -> Self {
        Self {
            rabi,
            delta_f,
            sweep_time,
            n_sweeps: 1,
            direction: SweepDirection::Same,
            detuning: DetuningConvention::Symmetric,
        }
    }

    pub fn with_sweeps(self, n_sweeps: usize) -> Self {
        Self { n_sweeps, ..self }
    }

    pub fn with_sweep_time(self, sweep_time: f64) -> Self {
        Self { sweep_time, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.rabi >= 0.0 && self.rabi.is_finite(), "rabi", "must be non-negative")?;
        require(self.delta_f >= 0.0 && self.delta_f.is_finite(), "delta_f", "must be non-negative")?;
        require(
            self.sweep_time > 0.0 && self.sweep_time.is_finite(),
            "sweep_time",
            "must be positive",
        )?;
        require(self.n_sweeps >= 1, "n_sweeps", "must be at least 1")
    }

    pub fn total_duration(&self) -> f64 {
        self.n_sweeps as f64 * self.sweep_time
    }

    /// Ramp index and time within that ramp. Times past the end belong to
    /// the last ramp.
    pub fn segment_at(&self, t: f64) -> (usize, f64) {
        let k = ((t / self.sweep_time).floor().max(0.0) as usize).min(self.n_sweeps - 1);
        (k, t - k as f64 * self.sweep_time)
    }

    /// Angular detuning A at offset `tau` into ramp `k`, rad/s.
    fn detuning_in_segment(&self, k: usize, tau: f64) -> f64 {
        let u = tau / self.sweep_time;
        let reversed = self.direction == SweepDirection::Alternating && k % 2 == 1;
        let u = if reversed { 1.0 - u } else { u };
        let shift = match self.detuning {
            DetuningConvention::Symmetric => 0.5,
            DetuningConvention::CrossingAtStart => 0.0,
        };
        TAU * self.delta_f * (u - shift)
    }

    /// Angular detuning A(t), rad/s.
    pub fn detuning_at(&self, t: f64) -> f64 {
        let (k, tau) = self.segment_at(t);
        self.detuning_in_segment(k, tau)
    }
}

/// H(t)/ħ in rad/s.
pub fn hamiltonian_at(t: f64, drive: &DriveProtocol) -> Operator2 {
    let a = drive.detuning_at(t);
    let half_omega = 0.5 * TAU * drive.rabi;
    let c = |re: f64| Complex64::new(re, 0.0);
    [[c(0.5 * a), c(-half_omega)], [c(-half_omega), c(-0.5 * a)]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub n_output_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step budget between consecutive output points.
    pub max_internal_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            n_output_points: 500,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_internal_steps: 10_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.n_output_points >= 2, "n_output_points", "must be at least 2")?;
        require(self.rel_tol > 0.0, "rel_tol", "must be positive")?;
        require(self.abs_tol > 0.0, "abs_tol", "must be positive")?;
        require(self.max_internal_steps >= 1, "max_internal_steps", "must be at least 1")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub coherence_magnitude: Vec<f64>,
    /// Full state at every output time.
    pub states: Vec<DensityMatrix>,
    pub final_state: DensityMatrix,
}

/// Bloch-vector right-hand side for a ramp whose detuning is
/// `a0 + slope·(t − t0)`.
#[derive(Debug, Clone, Copy)]
struct BlochRhs {
    omega: f64,
    gamma1: f64,
    transverse: f64,
    t0: f64,
    a0: f64,
    slope: f64,
}

impl BlochRhs {
    #[inline]
    fn eval(&self, t: f64, v: &[f64; 4]) -> [f64; 4] {
        let a = self.a0 + self.slope * (t - self.t0);
        let [c, x, y, z] = *v;
        [
            0.0,
            -a * y - self.transverse * x,
            a * x + self.omega * z - self.transverse * y,
            -self.omega * y + self.gamma1 * (c - z),
        ]
    }
}

fn segment_rhs(drive: &DriveProtocol, relax: &RelaxationParams, k: usize) -> BlochRhs {
    let a0 = drive.detuning_in_segment(k, 0.0);
    let a1 = drive.detuning_in_segment(k, drive.sweep_time);
    BlochRhs {
        omega: TAU * drive.rabi,
        gamma1: relax.gamma1(),
        transverse: relax.coherence_decay_rate(),
        t0: k as f64 * drive.sweep_time,
        a0,
        slope: (a1 - a0) / drive.sweep_time,
    }
}

/// Integrate the master equation over the whole schedule, sampling
/// `cfg.n_output_points` equally spaced times on `[0, n_sweeps·T]`.
///
/// The state is continuous across ramp boundaries; the detuning is not.
pub fn evolve(
    rho0: &DensityMatrix,
    drive: &DriveProtocol,
    relax: &RelaxationParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    rho0.validate()?;
    drive.validate()?;
    relax.validate()?;
    cfg.validate()?;

    let total = drive.total_duration();
    let n_out = cfg.n_output_points;
    let out_t: Vec<f64> = (0..n_out)
        .map(|j| if j + 1 == n_out { total } else { total * j as f64 / (n_out - 1) as f64 })
        .collect();

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_out),
        excited_population: Vec::with_capacity(n_out),
        coherence_magnitude: Vec::with_capacity(n_out),
        states: Vec::with_capacity(n_out),
        final_state: *rho0,
    };
    let mut record = |t: f64, v: &[f64; 4]| {
        let rho = DensityMatrix::from_bloch(v);
        traj.times.push(t);
        traj.excited_population.push(rho.excited_population());
        traj.coherence_magnitude.push(rho.coherence_magnitude());
        traj.states.push(rho);
    };

    let mut y = rho0.to_bloch();
    let mut t = 0.0;
    record(t, &y);
    let mut j = 1;
    let mut ig = Dopri5::new(cfg.rel_tol, cfg.abs_tol);
    let fail = |e: integrator::StepLimit| Error::IntegrationFailure {
        time: e.time,
        max_steps: cfg.max_internal_steps,
    };

    for k in 0..drive.n_sweeps {
        let seg_end = if k + 1 == drive.n_sweeps {
            total
        } else {
            (k + 1) as f64 * drive.sweep_time
        };
        let rhs = segment_rhs(drive, relax, k);
        let f = |t: f64, v: &[f64; 4]| rhs.eval(t, v);
        ig.reset();
        while j < n_out && out_t[j] <= seg_end {
            ig.advance(&f, t, out_t[j], &mut y, cfg.max_internal_steps).map_err(fail)?;
            t = out_t[j];
            record(t, &y);
            j += 1;
        }
        if t < seg_end {
            ig.advance(&f, t, seg_end, &mut y, cfg.max_internal_steps).map_err(fail)?;
            t = seg_end;
        }
    }
    debug_assert_eq!(j, n_out);
    traj.final_state = DensityMatrix::from_bloch(&y);
    Ok(traj)
}

/// Final excited population after the schedule, starting from the ground
/// state.
pub fn transition_probability(
    drive: &DriveProtocol,
    relax: &RelaxationParams,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    Ok(evolve(&DensityMatrix::ground(), drive, relax, cfg)?
        .final_state
        .excited_population())
}

/// Multi-ramp schedule from the ground state; identical to [`evolve`] from
/// the ground state, kept as a named entry point for schedule studies.
pub fn simulate_schedule(
    drive: &DriveProtocol,
    relax: &RelaxationParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    evolve(&DensityMatrix::ground(), drive, relax, cfg)
}
