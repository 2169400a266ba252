//! Acceptance suite. Every criterion runs at its stated tolerance and prints
//! one PASS/FAIL line; the process exits non-zero if any criterion fails.
//!
//! Run a subset by passing criterion ids:
//! `cargo test -p lzsweep-validation --test acceptance -- 2 3 8b`

use std::f64::consts::PI;
use std::time::Instant;

use lzsweep::fitting::{
    averaged_contrast, effective_tau, fit_averaged_decay, fit_exponential_decay, joint_fit,
    normalize_by_reference, AveragedDecayParams, ExperimentDataset, JointFitConfig, LindbladModel,
    TransitionModel,
};
use lzsweep::lindblad::{
    evolve, locate_peak, transition_probability, DensityMatrix, DriveProtocol, IntegratorConfig,
    PeakSearch, RelaxationParams, SweepDirection,
};
use lzsweep::lz::{self, PI_PULSE_TABLE};
use lzsweep::waveform::{chirp_phase, generate_iq, instantaneous_frequency, ChirpSpec};
use lzsweep::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const RABI_PEAK: f64 = 4.52e6;
const DELTA_F: f64 = 200e6;

fn peak_relax() -> RelaxationParams {
    RelaxationParams::new(12.6e-6, 0.139e-6).unwrap()
}

fn final_only() -> IntegratorConfig {
    IntegratorConfig {
        n_output_points: 2,
        max_internal_steps: 5_000_000,
        ..IntegratorConfig::default()
    }
}

/// Closed-system engine against the single-passage formula over a 5×5 grid
/// of coupling and adiabaticity.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rabis = [0.5e6, 0.75e6, 1.0e6, 1.5e6, 2.0e6];
    let xs: Vec<f64> = (0..5).map(|k| 0.05 * 100f64.powf(k as f64 / 4.0)).collect();
    let mut worst: f64 = 0.0;
    let mut worst_full_exponent: f64 = 0.0;
    for &rabi in &rabis {
        for &x in &xs {
            let t = lz::sweep_time_for_adiabaticity(rabi, DELTA_F, x);
            let drive = DriveProtocol::single(rabi, DELTA_F, t);
            let p = transition_probability(&drive, &RelaxationParams::closed(), &final_only()).unwrap();
            let alpha = lz::sweep_rate(DELTA_F, t);
            worst = worst.max((p - lz::p_lz(rabi, alpha).unwrap()).abs());
            worst_full_exponent = worst_full_exponent.max((p - (-(-x).exp_m1())).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 0.02 && elapsed < 60.0,
        format!(
            "max |engine - analytic| = {worst:.4} (tol 0.02), {elapsed:.1} s; \
             exponent 2πΩ²/α taken with the full Rabi frequency would miss by {worst_full_exponent:.3}"
        ),
    )
}

fn single_peak(n_sweeps: usize) -> lzsweep::lindblad::Peak {
    let drive = DriveProtocol::single(RABI_PEAK, DELTA_F, 1e-6).with_sweeps(n_sweeps);
    locate_peak(
        &drive,
        &peak_relax(),
        &final_only(),
        &PeakSearch::default(),
        Execution::Parallel,
    )
    .unwrap()
}

fn criterion_2() -> Outcome {
    let peak = single_peak(1);
    let (lo, hi) = (1.25e-6 * 0.75, 1.25e-6 * 1.25);
    let pass = peak.interior && (lo..=hi).contains(&peak.sweep_time);
    outcome(
        pass,
        format!(
            "single-sweep peak at T = {:.4} µs, P = {:.4}, interior = {} (window [{:.4}, {:.4}] µs)",
            peak.sweep_time * 1e6,
            peak.probability,
            peak.interior,
            lo * 1e6,
            hi * 1e6
        ),
    )
}

fn criterion_3() -> Outcome {
    let [one, two, three] = [1, 2, 3].map(single_peak);
    let pass = two.sweep_time < one.sweep_time
        && two.probability < one.probability
        && three.sweep_time <= two.sweep_time;
    outcome(
        pass,
        format!(
            "peaks (T µs, P): single ({:.3}, {:.4}), double ({:.3}, {:.4}), triple ({:.3}, {:.4})",
            one.sweep_time * 1e6,
            one.probability,
            two.sweep_time * 1e6,
            two.probability,
            three.sweep_time * 1e6,
            three.probability
        ),
    )
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    // a third of the draws start pure, where positivity is tightest
    let r: f64 = if rng.random_bool(1.0 / 3.0) { 1.0 } else { rng.random() };
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
    DensityMatrix::from_bloch(&[
        1.0,
        r * sin_theta * phi.cos(),
        r * sin_theta * phi.sin(),
        r * cos_theta,
    ])
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let (mut trace, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut n_states = 0;
    for _ in 0..100 {
        let t1 = 10f64.powf(rng.random_range(-6.0..-3.0));
        let t2 = 10f64.powf(rng.random_range(-8.0..(2.0 * t1).log10()));
        let relax = RelaxationParams::new(t1, t2).unwrap();
        let drive = DriveProtocol {
            n_sweeps: rng.random_range(1..=3),
            direction: if rng.random_bool(0.5) {
                SweepDirection::Same
            } else {
                SweepDirection::Alternating
            },
            ..DriveProtocol::single(
                10f64.powf(rng.random_range(5.0..7.3)),
                rng.random_range(0.0..400e6),
                rng.random_range(0.1e-6..5e-6),
            )
        };
        let rho0 = random_state(&mut rng);
        let traj = evolve(&rho0, &drive, &relax, &IntegratorConfig::default()).unwrap();
        for s in &traj.states {
            trace = trace.max((s.trace().re - 1.0).abs().max(s.trace().im.abs()));
            herm = herm.max(s.hermiticity_residual());
            min_eig = min_eig.min(s.eigenvalues()[0]);
            n_states += 1;
        }
    }
    outcome(
        trace <= 1e-8 && herm <= 1e-10 && min_eig >= -1e-9,
        format!(
            "{n_states} states: max |Tr - 1| = {trace:.1e}, max Hermiticity residual = {herm:.1e}, min eigenvalue = {min_eig:.1e}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 1.0;
    let mut parts = Vec::new();
    for (gain, pi_len) in PI_PULSE_TABLE {
        let rabi = lz::nominal_rabi(pi_len).unwrap();
        let drive = DriveProtocol::single(rabi, 0.0, pi_len);
        let p = transition_probability(&drive, &RelaxationParams::closed(), &IntegratorConfig::default()).unwrap();
        worst = worst.min(p);
        parts.push(format!("{gain}: {:.2} MHz -> {p:.6}", rabi * 1e-6));
    }
    outcome(worst >= 0.999, format!("min population {worst:.6} ({})", parts.join(", ")))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let rabi = [1.72e6, 2.4e6, 3.1e6, 3.8e6, 4.52e6];
    let t2 = [109e-9, 113e-9, 117e-9, 122e-9, 126e-9];
    let gains = [10000u32, 15000, 20000, 25000, 30000];
    let t1 = 12.63e-6;
    let cfg = JointFitConfig::default();
    let model = LindbladModel::default();
    let grid: Vec<f64> = (1..=30).map(|k| 10e-6 * k as f64 / 30.0).collect();
    let curves: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            let relax = RelaxationParams::new(t1, t2[k]).unwrap();
            grid.iter()
                .map(|&t| model.probability(rabi[k], &relax, t, &cfg.integrator).unwrap())
                .collect()
        })
        .collect();
    let scale = curves[4].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // 2% of the reference peak
    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let raw: Vec<ExperimentDataset> = (0..5)
        .map(|k| ExperimentDataset {
            label: gains[k].to_string(),
            ramp_times: grid.clone(),
            contrast: curves[k].iter().map(|c| c / scale + noise.sample(&mut rng)).collect(),
            is_reference: k == 4,
            gain: Some(gains[k]),
        })
        .collect();
    let data = normalize_by_reference(&raw).unwrap();
    let fit = joint_fit(&data, &cfg, &model).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let t1_err = (fit.t1_shared / t1 - 1.0).abs();
    let rabi_err = fit
        .per_dataset
        .iter()
        .zip(rabi)
        .map(|(d, r)| (d.rabi / r - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        fit.converged && t1_err <= 0.10 && rabi_err <= 0.05 && elapsed < 600.0,
        format!(
            "T1 = {:.2} µs (err {:.1}%), max Ω err {:.2}%, converged = {} after {} cycles, {elapsed:.0} s",
            fit.t1_shared * 1e6,
            t1_err * 100.0,
            rabi_err * 100.0,
            fit.converged,
            fit.n_cycles_used
        ),
    )
}

/// σ_τ against averaging: N-fold averaging divides the noise by √N, so
/// σ_τ ∝ N^(−1/2).
fn criterion_7() -> Outcome {
    let (amp, tau) = (0.04, 12.48e-6);
    let t: Vec<f64> = (0..20).map(|k| 40e-6 * k as f64 / 19.0).collect();
    let clean: Vec<f64> = t.iter().map(|t| amp * (-t / tau).exp()).collect();
    // noise level giving σ_τ/τ = 0.05 from the Fisher information at the truth
    let (mut saa, mut sat, mut stt) = (0.0, 0.0, 0.0);
    for &ti in &t {
        let e = (-ti / tau).exp();
        let (ga, gt) = (e, amp * ti / (tau * tau) * e);
        saa += ga * ga;
        sat += ga * gt;
        stt += gt * gt;
    }
    let inv_tt = saa / (saa * stt - sat * sat);
    let sigma0 = 0.05 * tau / inv_tt.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let levels = [1.0, 4.0, 16.0];
    let mut means = Vec::new();
    for n_avg in levels {
        let noise = Normal::new(0.0, sigma0 / f64::sqrt(n_avg)).unwrap();
        let mut acc = 0.0;
        let realizations = 400;
        for _ in 0..realizations {
            let y: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();
            acc += fit_exponential_decay(&t, &y).unwrap().sigma_tau;
        }
        means.push(acc / realizations as f64);
    }
    let lx: Vec<f64> = levels.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = means.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / 3.0, ly.iter().sum::<f64>() / 3.0);
    let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let exponent = -slope;
    outcome(
        (exponent - 0.5).abs() <= 0.1,
        format!(
            "σ_τ/τ at 1x, 4x, 16x averaging: {:.4}, {:.4}, {:.4}; exponent {exponent:.3} (0.5 ± 0.1)",
            means[0] / tau,
            means[1] / tau,
            means[2] / tau
        ),
    )
}

fn criterion_8a() -> Outcome {
    let te = effective_tau(12.63e-6, 0.26e-6);
    outcome(
        (te - 0.2548e-6).abs() <= 1e-10,
        format!("tau_eff = {:.6} µs (0.2548 ± 1e-4)", te * 1e6),
    )
}

fn criterion_8b() -> Outcome {
    let p = AveragedDecayParams::new(0.17, 12.63e-6, 0.26e-6).unwrap();
    let t = p.tau_eff / 1000.0;
    let value = averaged_contrast(t, &p).unwrap();
    let rel = (value / p.amplitude - 1.0).abs();
    // the value itself is A(1 − x/2 + x²/6 − ...) with x = 1e-3; report how
    // well it is evaluated too
    let x: f64 = 1e-3;
    let series = p.amplitude * (1.0 - x / 2.0 + x * x / 6.0 - x.powi(3) / 24.0);
    let eval_err = (value / series - 1.0).abs();
    outcome(
        rel <= 1e-9,
        format!(
            "averaged_contrast(tau_eff/1000)/A - 1 = {rel:.3e} (tol 1e-9); the exact value is A(1 - 5.0e-4 + ...), \
             evaluated to {eval_err:.1e} relative"
        ),
    )
}

fn criterion_8c() -> Outcome {
    let truth = AveragedDecayParams::new(0.17, 12.63e-6, 0.56e-6).unwrap();
    let t: Vec<f64> = (1..=25).map(|k| 0.1e-6 * k as f64).collect();
    let y: Vec<f64> = t.iter().map(|&t| averaged_contrast(t, &truth).unwrap()).collect();
    let fit = fit_averaged_decay(&t, &y, 12.63e-6).unwrap();
    let err = (fit.tau2 / truth.tau2 - 1.0).abs();
    outcome(err <= 0.05, format!("tau2 = {:.4} µs (err {:.2e})", fit.tau2 * 1e6, err))
}

fn criterion_9() -> Outcome {
    let spec = ChirpSpec::default();
    let wf = generate_iq(&spec, 4e9).unwrap();
    let modulus = wf.max_modulus_error();
    let f_start = instantaneous_frequency(0.0, &spec).unwrap().output;
    let f_end = instantaneous_frequency(spec.duration, &spec).unwrap().output;
    let endpoints = f_start == spec.f0 - spec.delta_f / 2.0 && f_end == spec.f0 + spec.delta_f / 2.0;
    let h = 1e-9;
    let mut fd_err: f64 = 0.0;
    for k in 1..200 {
        let t = spec.duration * k as f64 / 200.0;
        let dphi = chirp_phase(t + h, &spec).unwrap() - chirp_phase(t - h, &spec).unwrap();
        let f_fd = dphi / (2.0 * h) / (2.0 * PI);
        fd_err = fd_err.max((f_fd - instantaneous_frequency(t, &spec).unwrap().baseband).abs());
    }
    outcome(
        modulus <= 1e-12 && endpoints && fd_err <= 1.0,
        format!(
            "max ||IQ| - 1| = {modulus:.1e}, endpoints exact = {endpoints}, max finite-difference gap = {fd_err:.3} Hz"
        ),
    )
}

fn criterion_10() -> Outcome {
    let coherent = lz::p2_coherent(0.5, PI);
    let mut strong: f64 = 0.0;
    for k in 0..=100 {
        let p = k as f64 / 100.0;
        strong = strong.max((lz::p2_dephased(p, 0.7, 1e-3, 1e-6) - 2.0 * p * (1.0 - p)).abs());
        strong = strong.max((lz::p2_strong_dephasing(p) - 2.0 * p * (1.0 - p)).abs());
    }
    let n = 100_000;
    let argmax = (0..=n)
        .map(|k| k as f64 / n as f64)
        .max_by(|a, b| lz::p2_strong_dephasing(*a).total_cmp(&lz::p2_strong_dephasing(*b)))
        .unwrap();
    outcome(
        (coherent - 1.0).abs() <= 1e-12 && strong <= 1e-12 && (argmax - 0.5).abs() <= 1e-4,
        format!("p2_coherent(0.5, π) = {coherent}, strong-limit gap {strong:.1e}, argmax 2p(1-p) = {argmax}"),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("1", "analytic-numeric equivalence", criterion_1),
        ("2", "single-sweep peak location", criterion_2),
        ("3", "multi-sweep trends", criterion_3),
        ("4", "conservation suite", criterion_4),
        ("5", "π-pulse oracle", criterion_5),
        ("6", "joint fit round trip", criterion_6),
        ("7", "relaxometry precision scaling", criterion_7),
        ("8a", "effective decay time", criterion_8a),
        ("8b", "averaged contrast small-window limit", criterion_8b),
        ("8c", "averaged decay round trip", criterion_8c),
        ("9", "waveform suite", criterion_9),
        ("10", "double-passage algebra", criterion_10),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let o = run();
        println!(
            "criterion {id:>3} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failing criteria: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
}
