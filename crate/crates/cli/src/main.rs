//! `lzsweep`: chirp synthesis, sweep simulation, closed-form estimates and
//! fits from the command line.
//!
//! Every subcommand reads an optional JSON config (`--config`), applies flag
//! overrides on top, and writes CSV/JSON/SVG files under `--out-dir`.
//!
//! Exit status: 0 on success, 1 on runtime failures, 2 on invalid input or
//! usage, 3 when a fit wrote its results but did not converge.

// `!(x > 0.0)` is the NaN-rejecting form of `x <= 0.0`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod io;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lzsweep::Execution;

use config::{DatasetEntry, DecayModel, FixtureKind, RunConfig};
use error::Result;
use io::OutDir;

#[derive(Debug, Parser)]
#[command(name = "lzsweep", version, about = "Chirped adiabatic passage: waveforms, sweep simulation and fits")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all outputs (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Seed for synthetic noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run independent evaluations on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// I/Q samples of the chirp and its instantaneous frequency.
    Waveform(WaveformArgs),
    /// Composite hyperfine ODMR spectrum.
    Odmr(OdmrArgs),
    /// Transition probability against ramp time from the master equation.
    SweepScan(ScanArgs),
    /// Closed-form passage probabilities.
    Analytic(AnalyticArgs),
    /// Joint fit of ramp-time datasets with a shared T1.
    Fit(FitArgs),
    /// Exponential or window-averaged relaxometry fit.
    Relaxometry(RelaxometryArgs),
    /// Write seeded synthetic datasets.
    GenFixture(FixtureArgs),
}

#[derive(Debug, Args)]
struct WaveformArgs {
    /// Carrier, Hz.
    #[arg(long)]
    f0: Option<f64>,
    /// Chirp bandwidth, Hz.
    #[arg(long)]
    delta_f: Option<f64>,
    /// Ramp duration, s.
    #[arg(long)]
    duration: Option<f64>,
    /// Samples per second (required here or in the config).
    #[arg(long)]
    sample_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct OdmrArgs {
    /// Magnetic field, T.
    #[arg(long)]
    b0: Option<f64>,
    /// Hyperfine group center, Hz (default: lower transition).
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    fwhm: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Half-width of the frequency window, Hz.
    #[arg(long)]
    span: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
}

/// Drive and relaxation overrides shared by the dynamics commands.
#[derive(Debug, Args)]
struct DynamicsArgs {
    /// Ω/2π, Hz.
    #[arg(long)]
    rabi: Option<f64>,
    /// Ramp span, Hz.
    #[arg(long)]
    delta_f: Option<f64>,
    /// Per-ramp time, s.
    #[arg(long)]
    sweep_time: Option<f64>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    t2: Option<f64>,
    /// Closed system (no relaxation).
    #[arg(long, conflicts_with_all = ["t1", "t2"])]
    closed: bool,
}

/// Ramp-time grid overrides.
#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    /// Explicit grid, s (comma separated); replaces the linear grid.
    #[arg(long, value_delimiter = ',')]
    sweep_times: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Sweep counts to overlay, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',')]
    n_sweeps: Option<Vec<usize>>,
    /// Also write the trajectory of the configured drive.
    #[arg(long)]
    trajectory: bool,
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Fixture manifest listing datasets.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Dataset CSV (ramp_time_s, contrast); repeatable.
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// Label of the reference dataset (file stem for --dataset files).
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    max_cycles: Option<usize>,
}

#[derive(Debug, Args)]
struct RelaxometryArgs {
    /// CSV with time_s and value columns.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<DecayModel>,
    /// Fit an additive offset (exponential model).
    #[arg(long)]
    with_offset: bool,
    /// Known T1 for the averaged model, s.
    #[arg(long)]
    tau1: Option<f64>,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    #[arg(long, value_enum)]
    kind: Option<FixtureKind>,
    /// Gaussian noise σ (relative to the reference peak or amplitude).
    #[arg(long)]
    noise: Option<f64>,
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl DynamicsArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.drive.rabi, self.rabi);
        set(&mut cfg.drive.delta_f, self.delta_f);
        set(&mut cfg.drive.sweep_time, self.sweep_time);
        if self.closed {
            cfg.relaxation = None;
        } else if self.t1.is_some() || self.t2.is_some() {
            let mut r = cfg.relaxation();
            set(&mut r.t1, self.t1);
            set(&mut r.t2, self.t2);
            cfg.relaxation = Some(r);
        }
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.scan.t_min, self.t_min);
        set(&mut cfg.scan.t_max, self.t_max);
        set(&mut cfg.scan.n_points, self.n_points);
        if self.sweep_times.is_some() {
            cfg.scan.sweep_times = self.sweep_times.clone();
        } else if self.t_min.is_some() || self.t_max.is_some() || self.n_points.is_some() {
            cfg.scan.sweep_times = None;
        }
    }
}

/// Merge the config file and flag overrides.
fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    if cli.sequential {
        cfg.execution = Execution::Sequential;
        cfg.fit.joint.execution = Execution::Sequential;
    }
    match &cli.command {
        Command::Waveform(a) => {
            set(&mut cfg.chirp.f0, a.f0);
            set(&mut cfg.chirp.delta_f, a.delta_f);
            set(&mut cfg.chirp.duration, a.duration);
            if a.sample_rate.is_some() {
                cfg.sample_rate = a.sample_rate;
            }
        }
        Command::Odmr(a) => {
            set(&mut cfg.spin.b0, a.b0);
            if a.center.is_some() {
                cfg.odmr.center = a.center;
            }
            set(&mut cfg.odmr.fwhm, a.fwhm);
            set(&mut cfg.odmr.amplitude, a.amplitude);
            set(&mut cfg.odmr.span, a.span);
            set(&mut cfg.odmr.n_points, a.n_points);
        }
        Command::SweepScan(a) => {
            a.dynamics.apply(&mut cfg);
            a.grid.apply(&mut cfg);
            set(&mut cfg.scan.n_sweeps, a.n_sweeps.clone());
            cfg.scan.trajectory |= a.trajectory;
        }
        Command::Analytic(a) => {
            a.dynamics.apply(&mut cfg);
            a.grid.apply(&mut cfg);
        }
        Command::Fit(a) => {
            if a.manifest.is_some() {
                cfg.fit.manifest = a.manifest.clone();
            }
            cfg.fit.datasets.extend(a.datasets.iter().map(|p| DatasetEntry {
                path: p.clone(),
                label: None,
                reference: false,
                gain: None,
            }));
            if a.reference.is_some() {
                cfg.fit.reference = a.reference.clone();
            }
            set(&mut cfg.fit.joint.max_cycles, a.max_cycles);
        }
        Command::Relaxometry(a) => {
            if a.input.is_some() {
                cfg.relaxometry.input = a.input.clone();
            }
            set(&mut cfg.relaxometry.model, a.model);
            cfg.relaxometry.with_offset |= a.with_offset;
            if a.tau1.is_some() {
                cfg.relaxometry.tau1 = a.tau1;
            }
        }
        Command::GenFixture(a) => {
            set(&mut cfg.fixture.kind, a.kind);
            if a.noise.is_some() {
                cfg.fixture.noise = a.noise;
            }
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let cfg = build_config(cli)?;
    let mut out = OutDir::create(&cli.out_dir)?;
    let outcome = match &cli.command {
        Command::Waveform(_) => commands::waveform::run(&cfg, &mut out),
        Command::Odmr(_) => commands::odmr::run(&cfg, &mut out),
        Command::SweepScan(_) => commands::scan::run(&cfg, &mut out),
        Command::Analytic(_) => commands::analytic::run(&cfg, &mut out),
        Command::Fit(_) => commands::fit::run(&cfg, &mut out),
        Command::Relaxometry(_) => commands::relaxometry::run(&cfg, &mut out),
        Command::GenFixture(_) => commands::fixture::run(&cfg, &mut out),
    };
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    outcome.map(|()| out.written().to_vec())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
