use lzsweep::lindblad::{scan_sweep_times, simulate_schedule};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::io::OutDir;
use crate::svg::{Chart, Series};

#[derive(Serialize)]
struct CurveSummary {
    n_sweeps: usize,
    file: String,
    /// Grid point with the largest final probability.
    peak_sweep_time_s: f64,
    peak_probability: f64,
    /// False when the maximum sits on the first or last grid point.
    peak_interior: bool,
}

#[derive(Serialize)]
struct Summary {
    rabi_hz: f64,
    delta_f_hz: f64,
    t1_s: f64,
    t2_s: f64,
    n_grid: usize,
    curves: Vec<CurveSummary>,
}

/// Final transition probability against per-ramp time, one curve per sweep
/// count.
pub fn run(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let grid = cfg.scan.grid()?;
    cfg.validate_dynamics()?;
    let relax = cfg.relaxation();
    let mut chart = Chart::new("transition probability vs ramp time", "per-ramp time (µs)", "P(final)");
    let mut curves = Vec::new();
    for &n in &cfg.scan.n_sweeps {
        let drive = cfg.drive.with_sweeps(n);
        let probs = scan_sweep_times(&drive, &relax, &cfg.integrator, &grid, cfg.execution)?;
        let file = format!("scan_n{n}.csv");
        out.csv(
            &file,
            &[format!("n_sweeps = {n}")],
            &["sweep_time_s", "p_final"],
            grid.iter().copied().zip(probs.iter().copied()),
        )?;
        let k = (0..grid.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap_or(0);
        curves.push(CurveSummary {
            n_sweeps: n,
            file,
            peak_sweep_time_s: grid[k],
            peak_probability: probs[k],
            peak_interior: k > 0 && k + 1 < grid.len(),
        });
        chart = chart.with(Series::line(
            format!("{n} sweep{}", if n == 1 { "" } else { "s" }),
            grid.iter().map(|t| t * 1e6).collect(),
            probs,
        ));
    }
    out.text("scan.svg", &chart.render())?;

    if cfg.scan.trajectory {
        let traj = simulate_schedule(&cfg.drive, &relax, &cfg.integrator)?;
        let rows = (0..traj.times.len()).map(|k| (traj.times[k], traj.excited_population[k], traj.coherence_magnitude[k]));
        out.csv(
            "trajectory.csv",
            &[format!("sweep_time_s = {:e}", cfg.drive.sweep_time), format!("n_sweeps = {}", cfg.drive.n_sweeps)],
            &["t_seconds", "p_excited", "coh_mag"],
            rows,
        )?;
        let t_us: Vec<f64> = traj.times.iter().map(|t| t * 1e6).collect();
        let chart = Chart::new("trajectory", "time (µs)", "population / |coherence|")
            .with(Series::line("excited population", t_us.clone(), traj.excited_population))
            .with(Series::line("|rho01|", t_us, traj.coherence_magnitude));
        out.text("trajectory.svg", &chart.render())?;
    }

    out.json(
        "scan.json",
        &Summary {
            rabi_hz: cfg.drive.rabi,
            delta_f_hz: cfg.drive.delta_f,
            t1_s: relax.t1,
            t2_s: relax.t2,
            n_grid: grid.len(),
            curves,
        },
    )?;
    Ok(())
}
