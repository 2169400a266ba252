//! Simulation and estimation toolkit for frequency-ramped (Landau-Zener)
//! inversion of an inhomogeneously broadened two-level spin emitter.
//!
//! The crate is split by concern:
//!
//! - [`spin_model`]: transition frequencies, hyperfine line centers and
//!   composite Lorentzian ODMR spectra.
//! - [`waveform`]: quadratic-phase chirp synthesis (phase, I/Q samples,
//!   instantaneous frequency).
//! - [`lindblad`]: open-system evolution of the swept two-level system,
//!   including consecutive multi-sweep schedules and ramp-time scans.
//! - [`lz`]: closed-form Landau-Zener / Stückelberg expressions and
//!   π-pulse bookkeeping.
//! - [`fitting`]: joint multi-dataset coordinate-descent fit, exponential
//!   relaxometry fits and the time-averaged contrast model.
//!
//! Frequencies cross module boundaries in Hz; angular units only appear
//! inside the dynamics code.
//!
//! Independent evaluations (ramp-time grids, per-point fit residuals,
//! Monte-Carlo batches) go through [`par`], which dispatches to rayon when
//! the `parallel` feature is enabled and runs sequentially otherwise.

// `!(x > 0.0)` is the NaN-rejecting form of `x <= 0.0`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fitting;
pub mod lindblad;
pub mod lz;
pub mod par;
pub mod scalar;
pub mod spin_model;
pub mod waveform;

pub use error::{Error, Result};
pub use par::Execution;
