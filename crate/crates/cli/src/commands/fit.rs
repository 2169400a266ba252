use std::path::Path;

use lzsweep::fitting::{joint_fit, normalize_by_reference, ExperimentDataset, LindbladModel};
use serde::Serialize;

use super::{slug, Manifest};
use crate::config::{DatasetEntry, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{read_table, OutDir};
use crate::svg::{Chart, Series};

#[derive(Serialize)]
struct DatasetReport {
    label: String,
    file: String,
    gain: Option<u32>,
    reference: bool,
    rabi_hz: f64,
    t2_s: f64,
    gamma2_per_s: f64,
}

#[derive(Serialize)]
struct Report {
    converged: bool,
    n_cycles_used: usize,
    t1_s: f64,
    gamma1_per_s: f64,
    sse: f64,
    residual_norm: f64,
    sse_history: Vec<f64>,
    delta_f_hz: f64,
    n_sweeps: usize,
    datasets: Vec<DatasetReport>,
}

/// Gather dataset entries from the manifest and the explicit list, then
/// settle which one is the reference.
pub(crate) fn collect_entries(cfg: &RunConfig) -> Result<Vec<DatasetEntry>> {
    let mut entries = Vec::new();
    if let Some(path) = &cfg.fit.manifest {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.clone(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        entries.extend(m.datasets.into_iter().map(|mut d| {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
            d
        }));
    }
    entries.extend(cfg.fit.datasets.iter().cloned());
    if entries.is_empty() {
        return Err(CliError::Usage("no datasets given (use --manifest or --dataset)".into()));
    }
    for e in &mut entries {
        if e.label.is_none() {
            e.label = Some(e.path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()));
        }
    }

    if let Some(r) = &cfg.fit.reference {
        if !entries.iter().any(|e| e.label.as_deref() == Some(r.as_str())) {
            return Err(CliError::Usage(format!("reference '{r}' matches no dataset label")));
        }
        for e in &mut entries {
            e.reference = e.label.as_deref() == Some(r.as_str());
        }
    }
    match entries.iter().filter(|e| e.reference).count() {
        1 => {}
        0 if entries.len() == 1 => {
            eprintln!(
                "warning: single dataset '{}' has no reference flag; using it as the reference",
                entries[0].label.as_deref().unwrap_or_default()
            );
            entries[0].reference = true;
        }
        0 => {
            return Err(CliError::Usage(format!(
                "{} datasets but none is marked as reference (set `reference` or use --reference)",
                entries.len()
            )))
        }
        n => return Err(CliError::Usage(format!("{n} datasets are marked as reference; exactly one is allowed"))),
    }
    Ok(entries)
}

pub(crate) fn load_dataset(entry: &DatasetEntry) -> Result<ExperimentDataset> {
    let table = read_table(&entry.path, 2)?;
    let mut columns = table.columns.into_iter();
    let d = ExperimentDataset {
        label: entry.label.clone().unwrap_or_default(),
        ramp_times: columns.next().unwrap_or_default(),
        contrast: columns.next().unwrap_or_default(),
        is_reference: entry.reference,
        gain: entry.gain,
    };
    d.validate().map_err(|e| CliError::Config {
        path: entry.path.clone(),
        message: e.to_string(),
    })?;
    Ok(d)
}

/// Normalize, run the joint fit, write the JSON report and one overlay per
/// dataset. A fit that stops before converging still writes its outputs.
pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    cfg.fit.joint.validate().map_err(CliError::invalid("fit.joint"))?;
    if cfg.fit.n_sweeps == 0 || !(cfg.fit.delta_f > 0.0) {
        return Err(CliError::Usage("fit needs delta_f > 0 and n_sweeps >= 1".into()));
    }
    let entries = collect_entries(cfg)?;
    let raw: Vec<ExperimentDataset> = entries.iter().map(load_dataset).collect::<Result<_>>()?;
    let data = normalize_by_reference(&raw)?;
    let model = LindbladModel {
        delta_f: cfg.fit.delta_f,
        n_sweeps: cfg.fit.n_sweeps,
    };
    let fit = joint_fit(&data, &cfg.fit.joint, &model)?;

    let mut reports = Vec::new();
    for ((entry, d), f) in entries.iter().zip(&data).zip(&fit.per_dataset) {
        reports.push(DatasetReport {
            label: d.label.clone(),
            file: entry.path.display().to_string(),
            gain: d.gain,
            reference: d.is_reference,
            rabi_hz: f.rabi,
            t2_s: f.t2,
            gamma2_per_s: f.gamma2,
        });
        let t_us: Vec<f64> = d.ramp_times.iter().map(|t| t * 1e6).collect();
        let chart = Chart::new(
            format!("{}: Ω/2π = {:.3} MHz, T2 = {:.1} ns", d.label, f.rabi * 1e-6, f.t2 * 1e9),
            "ramp time (µs)",
            "normalized contrast",
        )
        .with(Series::markers("data", t_us.clone(), d.contrast.clone()))
        .with(Series::line("model", t_us, f.curve.clone()));
        out.text(&format!("fit_{}.svg", slug(&d.label)), &chart.render())?;
    }
    out.json(
        "fit.json",
        &Report {
            converged: fit.converged,
            n_cycles_used: fit.n_cycles_used,
            t1_s: fit.t1_shared,
            gamma1_per_s: fit.gamma1,
            sse: fit.sse,
            residual_norm: fit.residual_norm,
            sse_history: fit.sse_history.clone(),
            delta_f_hz: model.delta_f,
            n_sweeps: model.n_sweeps,
            datasets: reports,
        },
    )?;
    if !fit.converged {
        return Err(CliError::NotConverged {
            cycles: fit.n_cycles_used,
            out: out.root().to_path_buf(),
        });
    }
    Ok(())
}
