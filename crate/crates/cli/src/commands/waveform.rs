use lzsweep::waveform::{generate_iq, instantaneous_frequency};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::OutDir;
use crate::svg::{Chart, Series};

/// I/Q samples as CSV plus an SVG of the upconverted frequency.
pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let spec = cfg.chirp;
    spec.validate().map_err(CliError::invalid("chirp"))?;
    let rate = cfg
        .sample_rate
        .ok_or_else(|| CliError::Usage("sample_rate is required (config key `sample_rate` or --sample-rate)".into()))?;
    let wf = generate_iq(&spec, rate).map_err(CliError::invalid("sample_rate"))?;

    let times: Vec<f64> = wf.times().collect();
    let f_out: Vec<f64> = times
        .iter()
        // the last sample can sit a rounding error past T
        .map(|&t| instantaneous_frequency(t.min(spec.duration), &spec).map(|f| f.output))
        .collect::<lzsweep::Result<_>>()?;

    let comments = vec![
        format!("f0_hz = {:e}", spec.f0),
        format!("delta_f_hz = {:e}", spec.delta_f),
        format!("duration_s = {:e}", spec.duration),
        format!("sample_rate_hz = {rate:e}"),
        format!("n_samples = {}", wf.len()),
    ];
    let rows = (0..wf.len()).map(|n| (times[n], wf.i[n], wf.q[n], f_out[n]));
    out.csv("waveform.csv", &comments, &["t_seconds", "i", "q", "f_inst_hz"], rows)?;

    let chart = Chart::new(
        format!("chirp: {} MHz span about {} GHz", spec.delta_f * 1e-6, spec.f0 * 1e-9),
        "time (µs)",
        "instantaneous frequency (GHz)",
    )
    .with(Series::line(
        "f_inst",
        times.iter().map(|t| t * 1e6).collect(),
        f_out.iter().map(|f| f * 1e-9).collect(),
    ));
    out.text("waveform.svg", &chart.render())?;
    Ok(())
}
