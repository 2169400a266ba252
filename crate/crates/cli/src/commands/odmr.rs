use lzsweep::spin_model::{hyperfine_centers, hyperfine_lines, synthesize_odmr_spectrum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::OutDir;
use crate::svg::{Chart, Series};

#[derive(Serialize)]
struct Summary {
    f_plus_hz: f64,
    f_minus_hz: f64,
    center_hz: f64,
    line_centers_hz: Vec<f64>,
    fwhm_hz: f64,
    amplitude: f64,
}

/// Composite hyperfine spectrum around one transition.
pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let spin = cfg.spin;
    spin.validate().map_err(CliError::invalid("spin"))?;
    let o = cfg.odmr;
    let (f_plus, f_minus) = spin.transition_frequencies();
    let center = o.center.unwrap_or(f_minus);
    let lines = hyperfine_lines(center, spin.hyperfine_spacing, spin.n_hyperfine, o.fwhm, o.amplitude)
        .map_err(CliError::invalid("odmr"))?;
    if o.n_points < 2 || !(o.span > 0.0) {
        return Err(CliError::Usage("odmr needs span > 0 and n_points >= 2".into()));
    }
    let freqs: Vec<f64> = (0..o.n_points)
        .map(|k| center - o.span + 2.0 * o.span * k as f64 / (o.n_points - 1) as f64)
        .collect();
    let spectrum = synthesize_odmr_spectrum(&lines, &freqs);

    out.csv(
        "odmr.csv",
        &[],
        &["frequency_hz", "contrast"],
        freqs.iter().copied().zip(spectrum.iter().copied()),
    )?;
    out.json(
        "odmr.json",
        &Summary {
            f_plus_hz: f_plus,
            f_minus_hz: f_minus,
            center_hz: center,
            line_centers_hz: hyperfine_centers(center, spin.hyperfine_spacing, spin.n_hyperfine),
            fwhm_hz: o.fwhm,
            amplitude: o.amplitude,
        },
    )?;
    let chart = Chart::new("ODMR spectrum", "frequency (GHz)", "contrast").with(Series::line(
        "composite",
        freqs.iter().map(|f| f * 1e-9).collect(),
        spectrum,
    ));
    out.text("odmr.svg", &chart.render())?;
    Ok(())
}
