use lzsweep::fitting::{averaged_contrast, fit_averaged_decay, fit_exponential_decay_with, AveragedDecayParams, DecayFitOptions};
use serde::Serialize;

use crate::config::{DecayModel, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{read_table, OutDir};
use crate::svg::{Chart, Series};

#[derive(Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum Report {
    Exponential {
        input: String,
        amplitude: f64,
        sigma_amplitude: f64,
        tau_s: f64,
        sigma_tau_s: f64,
        offset: Option<f64>,
        residual_norm: f64,
    },
    Averaged {
        input: String,
        amplitude: f64,
        tau1_s: f64,
        tau2_s: f64,
        tau_eff_s: f64,
    },
}

const CURVE_POINTS: usize = 200;

pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let r = &cfg.relaxometry;
    let input = r
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("relaxometry needs an input CSV (`relaxometry.input` or --input)".into()))?;
    let table = read_table(input, 2)?;
    let (t, y) = (&table.columns[0], &table.columns[1]);
    let (t_lo, t_hi) = (t[0], t[t.len() - 1]);
    let dense: Vec<f64> = (0..CURVE_POINTS)
        .map(|k| t_lo + (t_hi - t_lo) * k as f64 / (CURVE_POINTS - 1) as f64)
        .collect();

    let (report, curve, title) = match r.model {
        DecayModel::Exponential => {
            let fit = fit_exponential_decay_with(t, y, DecayFitOptions { with_offset: r.with_offset })?;
            let curve: Vec<f64> = dense
                .iter()
                .map(|&x| fit.amplitude * (-x / fit.tau).exp() + fit.offset.unwrap_or(0.0))
                .collect();
            let title = format!("τ = {:.3} ± {:.3} µs", fit.tau * 1e6, fit.sigma_tau * 1e6);
            let report = Report::Exponential {
                input: input.display().to_string(),
                amplitude: fit.amplitude,
                sigma_amplitude: fit.sigma_amplitude,
                tau_s: fit.tau,
                sigma_tau_s: fit.sigma_tau,
                offset: fit.offset,
                residual_norm: fit.residual_norm,
            };
            (report, curve, title)
        }
        DecayModel::Averaged => {
            let tau1 = r.tau1.ok_or_else(|| {
                CliError::Usage("the averaged model needs a known tau1 (`relaxometry.tau1` or --tau1)".into())
            })?;
            let fit = fit_averaged_decay(t, y, tau1)?;
            let p = AveragedDecayParams::new(fit.amplitude, fit.tau1, fit.tau2)?;
            // the window average is undefined at T = 0
            let curve: Vec<f64> = dense
                .iter()
                .map(|&x| averaged_contrast(x.max(1e-3 * p.tau_eff), &p))
                .collect::<lzsweep::Result<_>>()?;
            let title = format!("τ2 = {:.3} µs, τ_eff = {:.3} µs", fit.tau2 * 1e6, fit.tau_eff * 1e6);
            let report = Report::Averaged {
                input: input.display().to_string(),
                amplitude: fit.amplitude,
                tau1_s: fit.tau1,
                tau2_s: fit.tau2,
                tau_eff_s: fit.tau_eff,
            };
            (report, curve, title)
        }
    };
    out.json("relaxometry.json", &report)?;
    let chart = Chart::new(title, "time (µs)", "signal")
        .with(Series::markers("data", t.iter().map(|x| x * 1e6).collect(), y.clone()))
        .with(Series::line("fit", dense.iter().map(|x| x * 1e6).collect(), curve));
    out.text("relaxometry.svg", &chart.render())?;
    Ok(())
}
