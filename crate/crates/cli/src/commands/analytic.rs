use lzsweep::lz::{self, SweepParams};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::OutDir;
use crate::svg::{Chart, Series};

#[derive(Serialize)]
struct Summary {
    rabi_hz: f64,
    delta_f_hz: f64,
    sweep_time_s: f64,
    sweep_rate_rad_s2: f64,
    adiabaticity: f64,
    p_lz: f64,
    /// Double passage with full dephasing between crossings.
    p2_strong_dephasing: f64,
    pi_pulse_s: f64,
    gain_table: Vec<GainRow>,
}

#[derive(Serialize)]
struct GainRow {
    gain: u32,
    pi_pulse_s: f64,
    rabi_hz: f64,
}

/// Closed-form single and double passage probabilities for the configured
/// drive and across the scan grid.
pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let d = cfg.drive;
    let point = SweepParams {
        rabi: d.rabi,
        delta_f: d.delta_f,
        sweep_time: d.sweep_time,
    };
    point.validate().map_err(CliError::invalid("drive"))?;
    let p = point.p_lz()?;
    let grid = cfg.scan.grid()?;

    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let sp = SweepParams { sweep_time: t, ..point };
        let p1 = sp.p_lz()?;
        rows.push((t, sp.adiabaticity(), p1, lz::p2_strong_dephasing(p1)));
    }
    out.csv(
        "analytic.csv",
        &[format!("rabi_hz = {:e}", d.rabi), format!("delta_f_hz = {:e}", d.delta_f)],
        &["sweep_time_s", "adiabaticity", "p_lz", "p2_dephased"],
        rows.iter().copied(),
    )?;

    let gain_table = lz::PI_PULSE_TABLE
        .iter()
        .map(|&(gain, pi)| GainRow {
            gain,
            pi_pulse_s: pi,
            rabi_hz: 0.5 / pi,
        })
        .collect();
    out.json(
        "analytic.json",
        &Summary {
            rabi_hz: d.rabi,
            delta_f_hz: d.delta_f,
            sweep_time_s: d.sweep_time,
            sweep_rate_rad_s2: point.sweep_rate(),
            adiabaticity: point.adiabaticity(),
            p_lz: p,
            p2_strong_dephasing: lz::p2_strong_dephasing(p),
            pi_pulse_s: lz::pi_pulse_duration(d.rabi)?,
            gain_table,
        },
    )?;

    let t_us: Vec<f64> = grid.iter().map(|t| t * 1e6).collect();
    let chart = Chart::new("closed-form passage probabilities", "ramp time (µs)", "probability")
        .with(Series::line("single passage", t_us.clone(), rows.iter().map(|r| r.2).collect()))
        .with(Series::line("double, dephased", t_us, rows.iter().map(|r| r.3).collect()));
    out.text("analytic.svg", &chart.render())?;
    Ok(())
}
