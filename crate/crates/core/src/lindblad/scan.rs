//! Ramp-time scans and peak location.

use serde::{Deserialize, Serialize};

use super::{transition_probability, DriveProtocol, IntegratorConfig, RelaxationParams};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scalar::minimize_bounded;

/// Final transition probability for every per-ramp time in `sweep_times`,
/// in grid order. Points are independent and dispatched per `exec`.
pub fn scan_sweep_times(
    drive: &DriveProtocol,
    relax: &RelaxationParams,
    cfg: &IntegratorConfig,
    sweep_times: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    if sweep_times.is_empty() {
        return Err(Error::Domain("sweep-time grid is empty".into()));
    }
    exec.try_map(sweep_times, |index, &sweep_time| {
        transition_probability(&drive.with_sweep_time(sweep_time), relax, cfg).map_err(|e| {
            Error::ScanPoint {
                index,
                sweep_time,
                source: Box::new(e),
            }
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub t_min: f64,
    pub t_max: f64,
    /// Coarse grid size before refinement.
    pub n_grid: usize,
    /// Absolute tolerance of the refined location, s.
    pub xtol: f64,
}

impl Default for PeakSearch {
    fn default() -> Self {
        Self {
            t_min: 0.1e-6,
            t_max: 6e-6,
            n_grid: 60,
            xtol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub sweep_time: f64,
    pub probability: f64,
    /// False when the coarse maximum sat on a grid edge.
    pub interior: bool,
}

/// Maximum of the transition probability over the per-ramp time: a coarse
/// grid scan followed by Brent refinement between the neighbours of the best
/// grid point.
pub fn locate_peak(
    drive: &DriveProtocol,
    relax: &RelaxationParams,
    cfg: &IntegratorConfig,
    search: &PeakSearch,
    exec: Execution,
) -> Result<Peak> {
    if !(search.t_min > 0.0 && search.t_max > search.t_min) || search.n_grid < 3 {
        return Err(Error::Domain(format!("invalid peak search window {search:?}")));
    }
    let n = search.n_grid;
    let grid: Vec<f64> = (0..n)
        .map(|k| search.t_min + (search.t_max - search.t_min) * k as f64 / (n - 1) as f64)
        .collect();
    let probs = scan_sweep_times(drive, relax, cfg, &grid, exec)?;
    let kmax = (0..n).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap_or(0);
    let interior = kmax > 0 && kmax + 1 < n;
    if !interior {
        return Ok(Peak {
            sweep_time: grid[kmax],
            probability: probs[kmax],
            interior,
        });
    }
    let refined = minimize_bounded(
        |t| transition_probability(&drive.with_sweep_time(t), relax, cfg).map(|p| -p),
        grid[kmax - 1],
        grid[kmax + 1],
        search.xtol,
        200,
        false,
    )?;
    let (sweep_time, probability) = if -refined.fx >= probs[kmax] {
        (refined.x, -refined.fx)
    } else {
        (grid[kmax], probs[kmax])
    };
    Ok(Peak {
        sweep_time,
        probability,
        interior,
    })
}
