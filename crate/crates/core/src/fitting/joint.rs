//! Joint multi-dataset fit: one shared γ₁ plus a Rabi frequency and a
//! pure-dephasing rate per dataset, by cyclic coordinate descent with bounded
//! Brent line searches in log-parameter space.

use serde::{Deserialize, Serialize};

use super::ExperimentDataset;
use crate::error::{Error, Result};
use crate::lindblad::{transition_probability, DriveProtocol, IntegratorConfig, RelaxationParams};
use crate::lz::nominal_rabi_for_gain;
use crate::par::Execution;
use crate::scalar::minimize_bounded;

/// Final transition probability for one ramp time. Implementations must be
/// shareable across worker threads.
pub trait TransitionModel: Sync {
    fn probability(
        &self,
        rabi: f64,
        relax: &RelaxationParams,
        sweep_time: f64,
        cfg: &IntegratorConfig,
    ) -> Result<f64>;
}

/// The Lindblad engine with a fixed sweep span and sweep count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    pub delta_f: f64,
    pub n_sweeps: usize,
}

impl Default for LindbladModel {
    fn default() -> Self {
        Self {
            delta_f: 200e6,
            n_sweeps: 1,
        }
    }
}

impl TransitionModel for LindbladModel {
    fn probability(
        &self,
        rabi: f64,
        relax: &RelaxationParams,
        sweep_time: f64,
        cfg: &IntegratorConfig,
    ) -> Result<f64> {
        let drive = DriveProtocol::single(rabi, self.delta_f, sweep_time).with_sweeps(self.n_sweeps);
        transition_probability(&drive, relax, cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JointFitConfig {
    /// Rabi frequency bounds, Hz.
    pub rabi_bounds: (f64, f64),
    /// γ₁ = 1/T₁ bounds, 1/s.
    pub gamma1_bounds: (f64, f64),
    /// Pure-dephasing rate bounds, 1/s.
    pub gamma2_bounds: (f64, f64),
    pub max_cycles: usize,
    /// Relative SSE improvement per full cycle below which the fit stops.
    pub coordinate_tolerance: f64,
    /// Line-search tolerance on the natural log of each parameter.
    pub line_search_xtol: f64,
    /// Half-width, in log units, of the line-search interval around the
    /// current value. A minimum on the window edge recentres the window, so
    /// the search can still walk to the bounds. `None` searches the full
    /// bound interval every time.
    pub search_window: Option<f64>,
    /// After each cycle, line-search along the cycle's net displacement.
    pub pattern_moves: bool,
    pub integrator: IntegratorConfig,
    pub execution: Execution,
}

/// Extra step multiples explored by a pattern move.
const PATTERN_SPAN: f64 = 16.0;
const PATTERN_XTOL: f64 = 1e-2;
/// An objective this small is an exact fit; relative improvement stops
/// being meaningful.
const SSE_FLOOR: f64 = 1e-24;

impl Default for JointFitConfig {
    fn default() -> Self {
        Self {
            rabi_bounds: (1e5, 5e7),
            gamma1_bounds: (1e4, 1e6),
            gamma2_bounds: (1e6, 1e8),
            max_cycles: 200,
            coordinate_tolerance: 1e-6,
            line_search_xtol: 1e-6,
            search_window: Some(1.0),
            pattern_moves: true,
            // only the final state is needed, so the whole schedule is one
            // output interval and gets a budget to match; ~1e-4 accuracy per
            // point is enough for the fit
            integrator: IntegratorConfig {
                n_output_points: 2,
                rel_tol: 1e-7,
                abs_tol: 1e-9,
                max_internal_steps: 5_000_000,
            },
            execution: Execution::default(),
        }
    }
}

impl JointFitConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, (lo, hi)) in [
            ("rabi_bounds", self.rabi_bounds),
            ("gamma1_bounds", self.gamma1_bounds),
            ("gamma2_bounds", self.gamma2_bounds),
        ] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("need 0 < lower < upper, got ({lo:e}, {hi:e})"),
                });
            }
        }
        if self.max_cycles == 0 {
            return Err(Error::InvalidParameter {
                field: "max_cycles",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.coordinate_tolerance >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "coordinate_tolerance",
                reason: "must be non-negative".into(),
            });
        }
        if !(self.line_search_xtol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "line_search_xtol",
                reason: "must be positive".into(),
            });
        }
        if let Some(w) = self.search_window {
            if !(w > 0.0) {
                return Err(Error::InvalidParameter {
                    field: "search_window",
                    reason: "must be positive".into(),
                });
            }
        }
        self.integrator.validate()
    }
}

/// Point in the joint parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointParams {
    pub gamma1: f64,
    pub rabi: Vec<f64>,
    pub gamma2: Vec<f64>,
}

impl JointParams {
    pub fn relaxation(&self, k: usize) -> Result<RelaxationParams> {
        RelaxationParams::from_rates(self.gamma1, self.gamma2[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFit {
    pub label: String,
    pub rabi: f64,
    pub t2: f64,
    pub gamma2: f64,
    /// Normalized model curve on the dataset's ramp times.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFitResult {
    pub t1_shared: f64,
    pub gamma1: f64,
    pub per_dataset: Vec<DatasetFit>,
    pub sse: f64,
    pub residual_norm: f64,
    pub n_cycles_used: usize,
    pub converged: bool,
    /// SSE at the start and after every full cycle.
    pub sse_history: Vec<f64>,
}

fn reference_index(datasets: &[ExperimentDataset]) -> Result<usize> {
    let refs: Vec<usize> = (0..datasets.len()).filter(|&k| datasets[k].is_reference).collect();
    match refs.as_slice() {
        [r] => Ok(*r),
        [] => Err(Error::Data("joint fit needs one reference dataset".into())),
        _ => Err(Error::Data(format!("{} datasets marked as reference", refs.len()))),
    }
}

struct Problem<'a, M: TransitionModel> {
    datasets: &'a [ExperimentDataset],
    reference: usize,
    cfg: &'a JointFitConfig,
    model: &'a M,
}

impl<M: TransitionModel> Problem<'_, M> {
    fn curve(&self, k: usize, rabi: f64, relax: &RelaxationParams) -> Result<Vec<f64>> {
        self.cfg.execution.try_map(&self.datasets[k].ramp_times, |_, &t| {
            self.model.probability(rabi, relax, t, &self.cfg.integrator)
        })
    }

    fn all_curves(&self, p: &JointParams) -> Result<Vec<Vec<f64>>> {
        let pairs: Vec<(usize, f64)> = self
            .datasets
            .iter()
            .enumerate()
            .flat_map(|(k, d)| d.ramp_times.iter().map(move |&t| (k, t)))
            .collect();
        let relax: Vec<RelaxationParams> = (0..self.datasets.len())
            .map(|k| p.relaxation(k))
            .collect::<Result<_>>()?;
        let flat = self.cfg.execution.try_map(&pairs, |_, &(k, t)| {
            self.model.probability(p.rabi[k], &relax[k], t, &self.cfg.integrator)
        })?;
        let mut out = Vec::with_capacity(self.datasets.len());
        let mut it = flat.into_iter();
        for d in self.datasets {
            out.push(it.by_ref().take(d.ramp_times.len()).collect());
        }
        Ok(out)
    }

    /// SSE between normalized data and model curves normalized by the
    /// reference curve's maximum.
    fn sse(&self, curves: &[Vec<f64>]) -> f64 {
        let scale = curves[self.reference]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(scale > 0.0) {
            return f64::INFINITY;
        }
        self.datasets
            .iter()
            .zip(curves)
            .map(|(d, c)| {
                d.contrast
                    .iter()
                    .zip(c)
                    .map(|(y, s)| (y - s / scale).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Objective value at `params` for already-normalized datasets.
pub fn joint_objective<M: TransitionModel>(
    datasets: &[ExperimentDataset],
    params: &JointParams,
    cfg: &JointFitConfig,
    model: &M,
) -> Result<f64> {
    check_inputs(datasets, params)?;
    let problem = Problem {
        datasets,
        reference: reference_index(datasets)?,
        cfg,
        model,
    };
    Ok(problem.sse(&problem.all_curves(params)?))
}

fn check_inputs(datasets: &[ExperimentDataset], params: &JointParams) -> Result<()> {
    if datasets.is_empty() {
        return Err(Error::Data("joint fit needs at least one dataset".into()));
    }
    for d in datasets {
        d.validate()?;
    }
    if params.rabi.len() != datasets.len() || params.gamma2.len() != datasets.len() {
        return Err(Error::Data("parameter count does not match dataset count".into()));
    }
    Ok(())
}

fn geometric_mean((lo, hi): (f64, f64)) -> f64 {
    (lo * hi).sqrt()
}

fn clamp_to((lo, hi): (f64, f64), x: f64) -> f64 {
    x.clamp(lo, hi)
}

/// Initial point: nominal Rabi/3 when the gain is known, otherwise the
/// geometric centre of each bound interval.
pub fn initial_params(datasets: &[ExperimentDataset], cfg: &JointFitConfig) -> JointParams {
    JointParams {
        gamma1: geometric_mean(cfg.gamma1_bounds),
        rabi: datasets
            .iter()
            .map(|d| match d.gain.and_then(nominal_rabi_for_gain) {
                Some(nominal) => clamp_to(cfg.rabi_bounds, nominal / 3.0),
                None => geometric_mean(cfg.rabi_bounds),
            })
            .collect(),
        gamma2: vec![geometric_mean(cfg.gamma2_bounds); datasets.len()],
    }
}

/// Joint parameters as natural logs: γ₁, then every Ω, then every γ₂.
fn to_log(p: &JointParams) -> Vec<f64> {
    std::iter::once(p.gamma1)
        .chain(p.rabi.iter().copied())
        .chain(p.gamma2.iter().copied())
        .map(f64::ln)
        .collect()
}

fn from_log(z: &[f64], n: usize) -> JointParams {
    JointParams {
        gamma1: z[0].exp(),
        rabi: z[1..=n].iter().map(|v| v.exp()).collect(),
        gamma2: z[n + 1..].iter().map(|v| v.exp()).collect(),
    }
}

/// Best point seen by a line search, with its curves.
struct Candidate {
    sse: f64,
    z: Vec<f64>,
    curves: Vec<Vec<f64>>,
}

impl<M: TransitionModel> Problem<'_, M> {
    /// Curves after changing coordinate `i` of `z`; only the affected
    /// dataset is recomputed unless `i` is the shared γ₁.
    fn curves_after(&self, i: usize, z: &[f64], curves: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = self.datasets.len();
        let p = from_log(z, n);
        if i == 0 {
            return self.all_curves(&p);
        }
        let k = if i <= n { i - 1 } else { i - n - 1 };
        let mut out = curves.to_vec();
        out[k] = self.curve(k, p.rabi[k], &p.relaxation(k)?)?;
        Ok(out)
    }
}

/// Fit already-normalized datasets, starting from [`initial_params`].
pub fn joint_fit<M: TransitionModel>(
    datasets: &[ExperimentDataset],
    cfg: &JointFitConfig,
    model: &M,
) -> Result<JointFitResult> {
    cfg.validate()?;
    joint_fit_from(datasets, cfg, model, initial_params(datasets, cfg))
}

/// Fit from an explicit starting point.
pub fn joint_fit_from<M: TransitionModel>(
    datasets: &[ExperimentDataset],
    cfg: &JointFitConfig,
    model: &M,
    start: JointParams,
) -> Result<JointFitResult> {
    cfg.validate()?;
    check_inputs(datasets, &start)?;
    let problem = Problem {
        datasets,
        reference: reference_index(datasets)?,
        cfg,
        model,
    };
    let n = datasets.len();
    let bounds: Vec<(f64, f64)> = std::iter::once(cfg.gamma1_bounds)
        .chain(std::iter::repeat_n(cfg.rabi_bounds, n))
        .chain(std::iter::repeat_n(cfg.gamma2_bounds, n))
        .map(|(lo, hi)| (lo.ln(), hi.ln()))
        .collect();
    let mut z: Vec<f64> = to_log(&start)
        .into_iter()
        .zip(&bounds)
        .map(|(v, &(lo, hi))| v.clamp(lo, hi))
        .collect();
    let mut curves = problem.all_curves(&from_log(&z, n))?;
    let mut sse = problem.sse(&curves);
    let mut history = vec![sse];
    let mut converged = false;
    let mut cycles = 0;

    while cycles < cfg.max_cycles {
        cycles += 1;
        let cycle_start = sse;
        let z_start = z.clone();
        for i in 0..z.len() {
            let (lo, hi) = bounds[i];
            let mut window = match cfg.search_window {
                Some(w) => ((z[i] - w).max(lo), (z[i] + w).min(hi)),
                _ => (lo, hi),
            };
            for _ in 0..16 {
                let mut best: Option<Candidate> = None;
                minimize_bounded(
                    |x: f64| -> Result<f64> {
                        let mut trial = z.clone();
                        trial[i] = x.clamp(lo, hi);
                        let trial_curves = problem.curves_after(i, &trial, &curves)?;
                        let value = problem.sse(&trial_curves);
                        if best.as_ref().is_none_or(|b| value < b.sse) {
                            best = Some(Candidate {
                                sse: value,
                                z: trial,
                                curves: trial_curves,
                            });
                        }
                        Ok(value)
                    },
                    window.0,
                    window.1,
                    cfg.line_search_xtol,
                    500,
                    true,
                )?;
                let Some(best) = best.filter(|b| b.sse <= sse) else {
                    break;
                };
                let x = best.z[i];
                sse = best.sse;
                z = best.z;
                curves = best.curves;
                // the local window cut the search short: recentre and retry
                let edge = 10.0 * cfg.line_search_xtol;
                let w = 0.5 * (window.1 - window.0);
                let at_low = x - window.0 <= edge && window.0 > lo;
                let at_high = window.1 - x <= edge && window.1 < hi;
                if !(at_low || at_high) {
                    break;
                }
                window = ((x - w).max(lo), (x + w).min(hi));
            }
        }
        if cfg.pattern_moves && sse < cycle_start {
            let d: Vec<f64> = z.iter().zip(&z_start).map(|(a, b)| a - b).collect();
            let mut best: Option<Candidate> = None;
            minimize_bounded(
                |s: f64| -> Result<f64> {
                    let trial: Vec<f64> = z_start
                        .iter()
                        .zip(&d)
                        .zip(&bounds)
                        .map(|((z0, d), &(lo, hi))| (z0 + s * d).clamp(lo, hi))
                        .collect();
                    let trial_curves = problem.all_curves(&from_log(&trial, n))?;
                    let value = problem.sse(&trial_curves);
                    if best.as_ref().is_none_or(|b| value < b.sse) {
                        best = Some(Candidate {
                            sse: value,
                            z: trial,
                            curves: trial_curves,
                        });
                    }
                    Ok(value)
                },
                1.0,
                1.0 + PATTERN_SPAN,
                PATTERN_XTOL,
                100,
                false,
            )?;
            if let Some(best) = best.filter(|b| b.sse < sse) {
                sse = best.sse;
                z = best.z;
                curves = best.curves;
            }
        }
        history.push(sse);
        let improvement = if cycle_start > 0.0 {
            (cycle_start - sse) / cycle_start
        } else {
            0.0
        };
        if improvement < cfg.coordinate_tolerance || sse <= SSE_FLOOR {
            converged = true;
            break;
        }
    }
    let p = from_log(&z, n);

    let scale = curves[problem.reference]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let per_dataset = datasets
        .iter()
        .enumerate()
        .map(|(k, d)| DatasetFit {
            label: d.label.clone(),
            rabi: p.rabi[k],
            t2: 1.0 / (p.gamma2[k] + 0.5 * p.gamma1),
            gamma2: p.gamma2[k],
            curve: curves[k].iter().map(|s| s / scale).collect(),
        })
        .collect();
    Ok(JointFitResult {
        t1_shared: 1.0 / p.gamma1,
        gamma1: p.gamma1,
        per_dataset,
        sse,
        residual_norm: sse.sqrt(),
        n_cycles_used: cycles,
        converged,
        sse_history: history,
    })
}
