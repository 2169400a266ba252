//! Run configuration: one JSON document, every block optional.
//!
//! Missing blocks take the defaults below; a block that is present must be
//! complete only where the target type has no defaults of its own (the drive
//! and relaxation blocks). Unknown keys are rejected so typos surface as
//! errors naming the key.

use std::path::{Path, PathBuf};

use lzsweep::fitting::JointFitConfig;
use lzsweep::lindblad::{DriveProtocol, IntegratorConfig, RelaxationParams};
use lzsweep::spin_model::SpinSystemParams;
use lzsweep::waveform::ChirpSpec;
use lzsweep::Execution;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 0x5eed_0006;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every synthetic-noise draw; echoed in output JSON.
    pub seed: u64,
    pub execution: Execution,
    pub spin: SpinSystemParams,
    pub odmr: OdmrBlock,
    pub chirp: ChirpSpec,
    /// AWG sample rate, Hz. No default: the waveform command requires it.
    pub sample_rate: Option<f64>,
    pub drive: DriveProtocol,
    /// `null` selects the closed system.
    pub relaxation: Option<RelaxationParams>,
    pub integrator: IntegratorConfig,
    pub scan: ScanBlock,
    pub fit: FitBlock,
    pub relaxometry: RelaxometryBlock,
    pub fixture: FixtureBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            execution: Execution::default(),
            spin: SpinSystemParams::default(),
            odmr: OdmrBlock::default(),
            chirp: ChirpSpec::default(),
            sample_rate: None,
            drive: DriveProtocol::single(4.52e6, 200e6, 1.25e-6),
            relaxation: Some(RelaxationParams {
                t1: 12.6e-6,
                t2: 0.139e-6,
            }),
            integrator: IntegratorConfig::default(),
            scan: ScanBlock::default(),
            fit: FitBlock::default(),
            relaxometry: RelaxometryBlock::default(),
            fixture: FixtureBlock::default(),
        }
    }
}

impl RunConfig {
    /// Parse `path`; relative input paths inside the document are resolved
    /// against the document's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(m) = self.fit.manifest.as_mut() {
            fix(m);
        }
        for d in &mut self.fit.datasets {
            fix(&mut d.path);
        }
        if let Some(p) = self.relaxometry.input.as_mut() {
            fix(p);
        }
    }

    pub fn relaxation(&self) -> RelaxationParams {
        self.relaxation.unwrap_or_else(RelaxationParams::closed)
    }

    pub fn validate_dynamics(&self) -> Result<()> {
        self.drive.validate().map_err(CliError::invalid("drive"))?;
        self.relaxation().validate().map_err(CliError::invalid("relaxation"))?;
        self.integrator.validate().map_err(CliError::invalid("integrator"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdmrBlock {
    /// Center of the hyperfine group, Hz; defaults to the lower transition.
    pub center: Option<f64>,
    pub fwhm: f64,
    pub amplitude: f64,
    /// Half-width of the frequency window around the center, Hz.
    pub span: f64,
    pub n_points: usize,
}

impl Default for OdmrBlock {
    fn default() -> Self {
        Self {
            center: None,
            fwhm: 40e6,
            amplitude: 0.01,
            span: 200e6,
            n_points: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanBlock {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    /// Explicit per-ramp times, s; overrides the linear grid.
    pub sweep_times: Option<Vec<f64>>,
    /// One curve per sweep count.
    pub n_sweeps: Vec<usize>,
    /// Also write the full trajectory of the configured drive.
    pub trajectory: bool,
}

impl Default for ScanBlock {
    fn default() -> Self {
        Self {
            t_min: 0.1e-6,
            t_max: 4e-6,
            n_points: 40,
            sweep_times: None,
            n_sweeps: vec![1],
            trajectory: false,
        }
    }
}

impl ScanBlock {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = match &self.sweep_times {
            Some(g) => g.clone(),
            None if self.n_points == 1 => vec![self.t_min],
            None => (0..self.n_points)
                .map(|k| self.t_min + (self.t_max - self.t_min) * k as f64 / (self.n_points - 1) as f64)
                .collect(),
        };
        if grid.is_empty() {
            return Err(CliError::Usage("scan grid is empty".into()));
        }
        if let Some(k) = grid.iter().position(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(CliError::Usage(format!(
                "scan grid point {k} ({}) is not a positive sweep time",
                grid[k]
            )));
        }
        if self.n_sweeps.is_empty() || self.n_sweeps.contains(&0) {
            return Err(CliError::Usage("scan.n_sweeps needs at least one positive count".into()));
        }
        Ok(grid)
    }
}

/// One dataset file for the joint fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub path: PathBuf,
    /// Defaults to the file stem.
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub reference: bool,
    #[serde(default)]
    pub gain: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitBlock {
    /// A fixture manifest listing the datasets.
    pub manifest: Option<PathBuf>,
    pub datasets: Vec<DatasetEntry>,
    /// Label of the reference dataset; overrides per-entry flags.
    pub reference: Option<String>,
    /// Ramp span and sweep count of the simulated experiment.
    pub delta_f: f64,
    pub n_sweeps: usize,
    pub joint: JointFitConfig,
}

impl Default for FitBlock {
    fn default() -> Self {
        Self {
            manifest: None,
            datasets: Vec::new(),
            reference: None,
            delta_f: 200e6,
            n_sweeps: 1,
            joint: JointFitConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// A·e^{−t/τ}, optionally with an offset.
    #[default]
    Exponential,
    /// Window-averaged decay with a known τ₁; fits τ₂.
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxometryBlock {
    /// Two-column CSV: time_s, value.
    pub input: Option<PathBuf>,
    pub model: DecayModel,
    pub with_offset: bool,
    /// Known τ₁ for the averaged model, s.
    pub tau1: Option<f64>,
}

impl Default for RelaxometryBlock {
    fn default() -> Self {
        Self {
            input: None,
            model: DecayModel::Exponential,
            with_offset: false,
            tau1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    /// Ramp-time datasets at several drive strengths with a shared T₁.
    #[default]
    RampFamily,
    /// Single-exponential relaxometry trace.
    Decay,
    /// Window-averaged relaxometry trace.
    Averaged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureBlock {
    pub kind: FixtureKind,
    /// Gaussian noise σ. For ramp families it is relative to the reference
    /// peak; for decay traces it is relative to the amplitude. Defaults:
    /// 0.02 for ramp families, zero otherwise.
    pub noise: Option<f64>,
    pub family: FamilyFixture,
    pub decay: DecayFixture,
    pub averaged: AveragedFixture,
}

impl Default for FixtureBlock {
    fn default() -> Self {
        Self {
            kind: FixtureKind::RampFamily,
            noise: None,
            family: FamilyFixture::default(),
            decay: DecayFixture::default(),
            averaged: AveragedFixture::default(),
        }
    }
}

impl FixtureBlock {
    pub fn noise(&self) -> f64 {
        self.noise.unwrap_or(match self.kind {
            FixtureKind::RampFamily => 0.02,
            FixtureKind::Decay | FixtureKind::Averaged => 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyFixture {
    pub t1: f64,
    /// Ω/2π per dataset, Hz.
    pub rabi: Vec<f64>,
    pub t2: Vec<f64>,
    pub gains: Vec<u32>,
    /// Index of the reference dataset.
    pub reference: usize,
    pub delta_f: f64,
    /// The grid is t_max·k/n_points for k = 1..=n_points.
    pub t_max: f64,
    pub n_points: usize,
    /// Raw contrast of the reference peak before noise.
    pub peak_contrast: f64,
}

impl Default for FamilyFixture {
    fn default() -> Self {
        Self {
            t1: 12.63e-6,
            rabi: vec![1.72e6, 2.4e6, 3.1e6, 3.8e6, 4.52e6],
            t2: vec![109e-9, 113e-9, 117e-9, 122e-9, 126e-9],
            gains: vec![10000, 15000, 20000, 25000, 30000],
            reference: 4,
            delta_f: 200e6,
            t_max: 10e-6,
            n_points: 30,
            peak_contrast: 0.0485,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayFixture {
    pub amplitude: f64,
    pub tau: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for DecayFixture {
    fn default() -> Self {
        Self {
            amplitude: 0.04,
            tau: 12.48e-6,
            t_max: 40e-6,
            n_points: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AveragedFixture {
    pub amplitude: f64,
    pub tau1: f64,
    pub tau2: f64,
    /// Collection windows t_max·k/n_points for k = 1..=n_points.
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for AveragedFixture {
    fn default() -> Self {
        Self {
            amplitude: 0.17,
            tau1: 12.63e-6,
            tau2: 0.56e-6,
            t_max: 2.5e-6,
            n_points: 25,
        }
    }
}
