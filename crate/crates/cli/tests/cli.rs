use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lzsweep::waveform::{generate_iq, ChirpSpec};
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn lzsweep(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lzsweep"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Numeric columns of a CSV written by the tool.
fn columns(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let n = lines.next().unwrap().split(',').count();
    let mut cols = vec![Vec::new(); n];
    for l in lines {
        for (c, v) in cols.iter_mut().zip(l.split(',')) {
            c.push(v.parse::<f64>().unwrap());
        }
    }
    cols
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.json");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn waveform_default_writes_two_files_that_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = lzsweep(dir.path(), &["waveform", "--sample-rate", "4e9"]);
    assert_ok(&o);
    let mut names: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["waveform.csv", "waveform.svg"]);

    let spec = ChirpSpec::default();
    let cols = columns(&dir.path().join("waveform.csv"));
    assert_eq!(cols[0].len(), (spec.duration * 4e9).floor() as usize + 1);
    let wf = generate_iq(&spec, 4e9).unwrap();
    assert_eq!(cols[1], wf.i);
    assert_eq!(cols[2], wf.q);
    assert_eq!(cols[3][0], spec.f0 - spec.delta_f / 2.0);
    let svg = fs::read_to_string(dir.path().join("waveform.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn zero_bandwidth_waveform_is_a_flat_line() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&lzsweep(dir.path(), &["waveform", "--delta-f", "0", "--sample-rate", "1e9"]));
    let cols = columns(&dir.path().join("waveform.csv"));
    assert!(cols[3].iter().all(|f| *f == 3.2e9));
    assert!(cols[1].iter().all(|i| *i == 1.0));
    let svg = fs::read_to_string(dir.path().join("waveform.svg")).unwrap();
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let ys: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
    assert!(ys.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn invalid_waveform_settings_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = lzsweep(dir.path(), &["waveform"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sample_rate"), "{}", stderr(&o));

    let o = lzsweep(dir.path(), &["waveform", "--sample-rate", "1e9"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("2000000000"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), r#"{"chirp": {"f0": 3.2e9, "delta_f": 2e8, "duration": -1}, "sample_rate": 4e9}"#);
    let o = lzsweep(dir.path(), &["--config", cfg.to_str().unwrap(), "waveform"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duration"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), r#"{"chirp": {"f0": 3.2e9, "delta_f": 2e8, "duraton": 1e-6}}"#);
    let o = lzsweep(dir.path(), &["--config", cfg.to_str().unwrap(), "waveform"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duraton"), "{}", stderr(&o));
}

#[test]
fn double_sweep_peak_is_earlier_and_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep-scan", "--t-min", "0.2e-6", "--t-max", "3e-6", "--n-points", "29", "--n-sweeps", "1,2"];
    assert_ok(&lzsweep(a.path(), &args));
    let mut seq = vec!["--sequential"];
    seq.extend(args);
    assert_ok(&lzsweep(b.path(), &seq));

    let summary = json(&a.path().join("scan.json"));
    let curves = summary["curves"].as_array().unwrap();
    let peak = |k: usize| curves[k]["peak_sweep_time_s"].as_f64().unwrap();
    assert!(curves.iter().all(|c| c["peak_interior"].as_bool().unwrap()));
    assert!(peak(1) < peak(0), "{summary}");

    for f in ["scan_n1.csv", "scan_n2.csv", "scan.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let cols = columns(&a.path().join("scan_n1.csv"));
    assert_eq!(cols.len(), 2);
    assert!(cols[1].iter().all(|p| (0.0..=1.0).contains(p)));
}

#[test]
fn empty_scan_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"scan": {"sweep_times": []}}"#);
    let o = lzsweep(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep-scan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("usage error"), "{}", stderr(&o));
}

#[test]
fn engine_failure_names_the_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"integrator": {"max_internal_steps": 1}, "scan": {"sweep_times": [1e-6, 2e-6]}}"#,
    );
    let o = lzsweep(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep-scan"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scan point 0"), "{}", stderr(&o));
}

#[test]
fn trajectory_export() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&lzsweep(
        dir.path(),
        &["sweep-scan", "--closed", "--sweep-times", "1e-6", "--trajectory"],
    ));
    let cols = columns(&dir.path().join("trajectory.csv"));
    assert_eq!(cols.len(), 3);
    assert_eq!(cols[0].len(), 500);
    // closed system: |ρ01|² = p(1 − p)
    for (p, c) in cols[1].iter().zip(&cols[2]) {
        assert!((c * c - p * (1.0 - p)).abs() < 1e-6);
    }
}

#[test]
fn analytic_and_odmr_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&lzsweep(dir.path(), &["analytic", "--n-points", "5"]));
    let s = json(&dir.path().join("analytic.json"));
    let p = s["p_lz"].as_f64().unwrap();
    let a = s["adiabaticity"].as_f64().unwrap();
    assert!((p - (1.0 - (-a / 4.0).exp())).abs() < 1e-12);
    assert_eq!(columns(&dir.path().join("analytic.csv"))[0].len(), 5);

    assert_ok(&lzsweep(dir.path(), &["odmr", "--n-points", "201"]));
    let cols = columns(&dir.path().join("odmr.csv"));
    assert_eq!(cols.len(), 2);
    assert_eq!(cols[0].len(), 201);
    assert!(cols[1].iter().all(|c| *c >= 0.0));
    let s = json(&dir.path().join("odmr.json"));
    assert_eq!(s["line_centers_hz"].as_array().unwrap().len(), 4);
}

#[test]
fn fixture_generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&lzsweep(dir.path(), &["gen-fixture"]));
    let bundled = fixtures().join("ramp_family");
    for entry in fs::read_dir(&bundled).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(bundled.join(&name)).unwrap(),
            fs::read(dir.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["seed"].as_u64().unwrap(), 0x5eed_0006);
    assert_eq!(m["datasets"].as_array().unwrap().len(), 5);

    let other = tempfile::tempdir().unwrap();
    assert_ok(&lzsweep(other.path(), &["--seed", "7", "gen-fixture"]));
    assert_ne!(
        fs::read(dir.path().join("dataset_30000.csv")).unwrap(),
        fs::read(other.path().join("dataset_30000.csv")).unwrap()
    );
}

#[test]
fn bundled_family_fit_recovers_t1() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixtures().join("ramp_family/manifest.json");
    let o = lzsweep(dir.path(), &["fit", "--manifest", manifest.to_str().unwrap()]);
    assert_ok(&o);
    let r = json(&dir.path().join("fit.json"));
    assert!(r["converged"].as_bool().unwrap());
    let t1 = r["t1_s"].as_f64().unwrap();
    assert!((t1 / 12.63e-6 - 1.0).abs() <= 0.10, "T1 = {t1}");
    for (d, truth) in r["datasets"].as_array().unwrap().iter().zip([1.72e6, 2.4e6, 3.1e6, 3.8e6, 4.52e6]) {
        let rabi = d["rabi_hz"].as_f64().unwrap();
        assert!((rabi / truth - 1.0).abs() <= 0.05, "{d}");
    }
    for g in [10000, 15000, 20000, 25000, 30000] {
        assert!(dir.path().join(format!("fit_{g}.svg")).exists());
    }
}

#[test]
fn single_dataset_is_promoted_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixtures().join("ramp_family/dataset_30000.csv");
    let o = lzsweep(dir.path(), &["fit", "--dataset", data.to_str().unwrap(), "--max-cycles", "1"]);
    let err = stderr(&o);
    assert!(err.contains("warning") && err.contains("dataset_30000"), "{err}");
    // one cycle is not enough to converge: results are written, exit 3
    assert_eq!(o.status.code(), Some(3), "{err}");
    let r = json(&dir.path().join("fit.json"));
    assert!(!r["converged"].as_bool().unwrap());
    assert!(r["datasets"][0]["reference"].as_bool().unwrap());
}

#[test]
fn several_datasets_need_a_reference() {
    let dir = tempfile::tempdir().unwrap();
    let a = fixtures().join("ramp_family/dataset_10000.csv");
    let b = fixtures().join("ramp_family/dataset_30000.csv");
    let o = lzsweep(dir.path(), &["fit", "--dataset", a.to_str().unwrap(), "--dataset", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reference"), "{}", stderr(&o));

    let o = lzsweep(
        dir.path(),
        &["fit", "--dataset", a.to_str().unwrap(), "--dataset", b.to_str().unwrap(), "--reference", "nope"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_dataset_row_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.csv");
    fs::write(&bad, "ramp_time_s,contrast\n1e-7,0.01\n2e-7,0.02\n3e-7,oops\n").unwrap();
    let o = lzsweep(dir.path(), &["fit", "--dataset", bad.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("broken.csv:4"), "{err}");
}

#[test]
fn relaxometry_fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let decay = fixtures().join("decay/decay.csv");
    assert_ok(&lzsweep(dir.path(), &["relaxometry", "--input", decay.to_str().unwrap()]));
    let r = json(&dir.path().join("relaxometry.json"));
    assert_eq!(r["model"], "exponential");
    assert!((r["tau_s"].as_f64().unwrap() / 12.48e-6 - 1.0).abs() < 0.01, "{r}");
    assert!(r["sigma_tau_s"].as_f64().is_some());

    let avg = fixtures().join("averaged/averaged.csv");
    assert_ok(&lzsweep(
        dir.path(),
        &["relaxometry", "--input", avg.to_str().unwrap(), "--model", "averaged", "--tau1", "12.63e-6"],
    ));
    let r = json(&dir.path().join("relaxometry.json"));
    assert!((r["tau2_s"].as_f64().unwrap() / 0.56e-6 - 1.0).abs() < 0.05, "{r}");
    assert!(dir.path().join("relaxometry.svg").exists());
}

#[test]
fn averaged_fit_reports_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    // window average of a pure τ1 decay: τ_eff = τ1, no second pathway
    let tau1 = 12.63e-6;
    let mut body = String::from("collection_time_s,value\n");
    for k in 1..=25 {
        let t = 1e-6 * k as f64;
        let x: f64 = t / tau1;
        body += &format!("{t},{}\n", 0.17 * (1.0 - (-x).exp()) / x);
    }
    let input = dir.path().join("pure.csv");
    fs::write(&input, body).unwrap();
    let o = lzsweep(
        dir.path(),
        &["relaxometry", "--input", input.to_str().unwrap(), "--model", "averaged", "--tau1", "12.63e-6"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tau_eff"), "{}", stderr(&o));

    let o = lzsweep(dir.path(), &["relaxometry", "--input", input.to_str().unwrap(), "--model", "averaged"]);
    assert_eq!(o.status.code(), Some(2));
}
