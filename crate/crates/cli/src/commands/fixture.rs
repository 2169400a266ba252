//! Seeded synthetic data for fits and relaxometry.

use lzsweep::fitting::{averaged_contrast, AveragedDecayParams, LindbladModel, TransitionModel};
use lzsweep::lindblad::RelaxationParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Manifest;
use crate::config::{DatasetEntry, FixtureKind, RunConfig};
use crate::error::{CliError, Result};
use crate::io::OutDir;

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let noise = cfg.fixture.noise();
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(CliError::Usage(format!("fixture.noise must be non-negative, got {noise}")));
    }
    let normal = Normal::new(0.0, noise).expect("finite non-negative sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draw = move || if noise == 0.0 { 0.0 } else { normal.sample(&mut rng) };
    match cfg.fixture.kind {
        FixtureKind::RampFamily => ramp_family(cfg, noise, &mut draw, out),
        FixtureKind::Decay => decay(cfg, noise, &mut draw, out),
        FixtureKind::Averaged => averaged(cfg, noise, &mut draw, out),
    }
}

fn ramp_family(cfg: &RunConfig, noise: f64, draw: &mut impl FnMut() -> f64, out: &mut OutDir) -> Result<()> {
    let f = &cfg.fixture.family;
    let n = f.rabi.len();
    if n == 0 || f.t2.len() != n || (!f.gains.is_empty() && f.gains.len() != n) {
        return Err(CliError::Usage(
            "fixture.family needs equal-length rabi and t2 lists (and gains, if given)".into(),
        ));
    }
    if f.reference >= n || f.n_points == 0 || !(f.t_max > 0.0) || !(f.peak_contrast > 0.0) {
        return Err(CliError::Usage(
            "fixture.family needs reference < dataset count, n_points >= 1, t_max > 0 and peak_contrast > 0".into(),
        ));
    }
    let relax: Vec<RelaxationParams> = f
        .t2
        .iter()
        .map(|&t2| RelaxationParams::new(f.t1, t2))
        .collect::<lzsweep::Result<_>>()
        .map_err(CliError::invalid("fixture.family"))?;
    let model = LindbladModel {
        delta_f: f.delta_f,
        n_sweeps: 1,
    };
    let grid: Vec<f64> = (1..=f.n_points).map(|k| f.t_max * k as f64 / f.n_points as f64).collect();
    let integrator = cfg.fit.joint.integrator;
    let flat = cfg.execution.map_range(n * grid.len(), |idx| {
        let (k, j) = (idx / grid.len(), idx % grid.len());
        model.probability(f.rabi[k], &relax[k], grid[j], &integrator)
    });
    let flat: Vec<f64> = flat.into_iter().collect::<lzsweep::Result<_>>()?;
    let curves: Vec<&[f64]> = flat.chunks(grid.len()).collect();
    let scale = curves[f.reference].iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut entries = Vec::with_capacity(n);
    for (k, curve) in curves.iter().enumerate() {
        let label = f.gains.get(k).map_or_else(|| format!("set{k}"), |g| g.to_string());
        let file = format!("dataset_{label}.csv");
        let contrast: Vec<f64> = curve
            .iter()
            .map(|c| f.peak_contrast * (c / scale + draw()))
            .collect();
        out.csv(
            &file,
            &[
                format!("rabi_hz = {:e}", f.rabi[k]),
                format!("t1_s = {:e}", f.t1),
                format!("t2_s = {:e}", f.t2[k]),
                format!("noise = {noise:e}"),
                format!("seed = {}", cfg.seed),
            ],
            &["ramp_time_s", "contrast"],
            grid.iter().copied().zip(contrast),
        )?;
        entries.push(DatasetEntry {
            path: file.into(),
            label: Some(label),
            reference: k == f.reference,
            gain: f.gains.get(k).copied(),
        });
    }
    out.json(
        "manifest.json",
        &Manifest {
            seed: Some(cfg.seed),
            generator: serde_json::json!({ "kind": "ramp_family", "noise": noise, "family": f }),
            datasets: entries,
        },
    )?;
    Ok(())
}

fn decay(cfg: &RunConfig, noise: f64, draw: &mut impl FnMut() -> f64, out: &mut OutDir) -> Result<()> {
    let d = cfg.fixture.decay;
    if d.n_points < 3 || !(d.t_max > 0.0) || !(d.tau > 0.0) {
        return Err(CliError::Usage("fixture.decay needs n_points >= 3, t_max > 0 and tau > 0".into()));
    }
    let rows: Vec<(f64, f64)> = (0..d.n_points)
        .map(|k| {
            let t = d.t_max * k as f64 / (d.n_points - 1) as f64;
            (t, d.amplitude * ((-t / d.tau).exp() + draw()))
        })
        .collect();
    out.csv(
        "decay.csv",
        &[format!("amplitude = {:e}", d.amplitude), format!("tau_s = {:e}", d.tau), format!("seed = {}", cfg.seed)],
        &["time_s", "value"],
        rows,
    )?;
    out.json(
        "manifest.json",
        &Manifest {
            seed: Some(cfg.seed),
            generator: serde_json::json!({ "kind": "decay", "noise": noise, "decay": d }),
            datasets: Vec::new(),
        },
    )?;
    Ok(())
}

fn averaged(cfg: &RunConfig, noise: f64, draw: &mut impl FnMut() -> f64, out: &mut OutDir) -> Result<()> {
    let a = cfg.fixture.averaged;
    if a.n_points < 3 || !(a.t_max > 0.0) {
        return Err(CliError::Usage("fixture.averaged needs n_points >= 3 and t_max > 0".into()));
    }
    let p = AveragedDecayParams::new(a.amplitude, a.tau1, a.tau2).map_err(CliError::invalid("fixture.averaged"))?;
    let rows: Vec<(f64, f64)> = (1..=a.n_points)
        .map(|k| {
            let t = a.t_max * k as f64 / a.n_points as f64;
            averaged_contrast(t, &p).map(|v| (t, v + a.amplitude * draw()))
        })
        .collect::<lzsweep::Result<_>>()?;
    out.csv(
        "averaged.csv",
        &[
            format!("amplitude = {:e}", a.amplitude),
            format!("tau1_s = {:e}", a.tau1),
            format!("tau2_s = {:e}", a.tau2),
            format!("seed = {}", cfg.seed),
        ],
        &["collection_time_s", "value"],
        rows,
    )?;
    out.json(
        "manifest.json",
        &Manifest {
            seed: Some(cfg.seed),
            generator: serde_json::json!({ "kind": "averaged", "noise": noise, "averaged": a }),
            datasets: Vec::new(),
        },
    )?;
    Ok(())
}
