use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(sub: &str, config: &str, dir: &Path, check: bool) -> Output {
    let cfg = dir.join(format!("{sub}.json"));
    std::fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_resetshape"));
    cmd.arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"));
    if check {
        cmd.arg("--check");
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn out(dir: &Path, name: &str) -> PathBuf {
    dir.join("out").join(name)
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// `(freq_hz, n, mag_db, phase_deg)` rows.
fn hosidf_rows(path: PathBuf) -> Vec<(f64, usize, f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("freq_hz,n,mag_db,phase_deg"));
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (
                v[0].parse().unwrap(),
                v[1].parse().unwrap(),
                v[2].parse().unwrap(),
                v[3].parse().unwrap(),
            )
        })
        .collect()
}

const TABLE1_BAND: &str =
    r#""band": {"omega_l_hz": 31.622776601683793, "omega_h_hz": 316.22776601683796}"#;

#[test]
fn design_reproduces_table_parameters() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{{TABLE1_BAND}, "target": {{"psi_f_deg": -57.34}}}}"#);
    let o = run("design", &cfg, d.path(), true);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(out(d.path(), "design.json"));
    let (l, q) = (doc["lambda"].as_f64().unwrap(), doc["q"].as_f64().unwrap());
    assert!((l + 0.69).abs() < 0.025, "{l}");
    assert!((q - 2.21).abs() < 0.02, "{q}");
    assert!(out(d.path(), "filter_phase.csv").exists());
    assert!(out(d.path(), "filter_phase.svg").exists());
}

#[test]
fn design_small_target_gives_small_lambda() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{{TABLE1_BAND}, "target": {{"psi_f_deg": -1.0}}}}"#);
    assert_eq!(code(&run("design", &cfg, d.path(), false)), 0);
    let doc = json(out(d.path(), "design.json"));
    assert!(doc["lambda"].as_f64().unwrap().abs() < 0.02);
}

#[test]
fn malformed_config_exits_2_with_path() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        "design",
        r#"{"band": {"omega_l_hz": 1.0, "omega_h_hz": "ten"}}"#,
        d.path(),
        false,
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("band.omega_h_hz"));
    let o = run(
        "design",
        r#"{"band": {"omega_l_hz": 1.0, "omega_h_hz": 10.0}, "targte": {}}"#,
        d.path(),
        false,
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("targte"));
    let o = run("design", "{not json", d.path(), false);
    assert_eq!(code(&o), 2);
    let o = run(
        "design",
        r#"{"target": {"psi_f_deg": -30}}"#,
        d.path(),
        false,
    );
    assert_eq!(code(&o), 2, "missing band");
}

#[test]
fn failing_design_check_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{{TABLE1_BAND}, "target": {{"psi_f_deg": -57.34}}, "shaping": {{"psi_b_deg": -0.001}}}}"#
    );
    assert_eq!(code(&run("design", &cfg, d.path(), true)), 4);
    assert_eq!(code(&run("design", &cfg, d.path(), false)), 0);
}

#[test]
fn hosidf_clegg_first_harmonic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"reset": {"element": "clegg", "gamma": 0.0},
                  "grid": {"f_min_hz": 0.1, "f_max_hz": 100.0, "points_per_decade": 20, "max_order": 5}}"#;
    assert_eq!(code(&run("hosidf", cfg, d.path(), false)), 0);
    let rows = hosidf_rows(out(d.path(), "hosidf.csv"));
    assert_eq!(rows.len(), 61 * 3);
    for (f, n, mag, _) in rows.iter().filter(|r| r.1 == 1) {
        let expect = 20.0 * (1.619 / (std::f64::consts::TAU * f)).log10();
        assert!((mag - expect).abs() < 0.01, "{f} {n} {mag} {expect}");
    }
}

#[test]
fn hosidf_linear_element_emits_first_harmonic_only() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"reset": {"element": "fore", "gamma": 1.0, "omega_r_hz": 1.0},
                  "grid": {"f_min_hz": 0.1, "f_max_hz": 10.0, "points_per_decade": 10}}"#;
    assert_eq!(code(&run("hosidf", cfg, d.path(), false)), 0);
    let rows = hosidf_rows(out(d.path(), "hosidf.csv"));
    assert!(!rows.is_empty() && rows.iter().all(|r| r.1 == 1));
}

#[test]
fn hosidf_bandpassed_notches_are_visible() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"band": {"omega_l_hz": 0.15915494309189535, "omega_h_hz": 1.5915494309189535},
                  "target": {"phase_advantage_deg": 31.51}, "shaping": {"form": "full_filter"},
                  "reset": {"gamma": 0.2, "omega_r_hz": 0.07957747154594767, "omega_f_hz": 1591.5494309189535},
                  "grid": {"f_min_hz": 0.01, "f_max_hz": 100.0, "points_per_decade": 50, "max_order": 3}}"#;
    let o = run("hosidf", cfg, d.path(), true);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary = json(out(d.path(), "hosidf.json"));
    let notches: Vec<f64> = summary["notches_hz"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(notches.len(), 4);
    let rows = hosidf_rows(out(d.path(), "hosidf.csv"));
    for f in notches {
        let row = rows
            .iter()
            .find(|r| r.1 == 3 && (r.0 / f - 1.0).abs() < 1e-9)
            .unwrap();
        assert!(row.2 < -160.0, "{row:?}");
    }
}

#[test]
fn hosidf_output_is_byte_stable() {
    let cfg = r#"{"reset": {"element": "sore", "gamma": 0.2, "omega_r_hz": 1.0, "beta": 0.5},
                  "grid": {"f_min_hz": 0.1, "f_max_hz": 10.0, "points_per_decade": 40}}"#;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&run("hosidf", cfg, a.path(), false)), 0);
    assert_eq!(code(&run("hosidf", cfg, b.path(), false)), 0);
    let read = |d: &Path| std::fs::read(out(d, "hosidf.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn simulate_matches_analytic_harmonics() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"reset": {"element": "fore", "gamma": 0.25, "omega_r_hz": 1.0},
                  "sim": {"frequencies_hz": [0.3, 3.0], "samples_per_period": 4096}}"#;
    let o = run("simulate", cfg, d.path(), true);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(out(d.path(), "simulate.json"));
    assert_eq!(rep["rows"].as_array().unwrap().len(), 6);
    assert!(out(d.path(), "sim_0.3hz.csv").exists());
}

#[test]
fn simulate_linear_limit_flag() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"reset": {"element": "sore", "gamma": 1.0, "omega_r_hz": 1.0, "beta": 0.5},
                  "sim": {"frequencies_hz": [0.5], "samples_per_period": 1024, "compare_linear": true, "orders": [1]},
                  "output": {"formats": ["json"]}}"#;
    assert_eq!(code(&run("simulate", cfg, d.path(), true)), 0);
    let rep = json(out(d.path(), "simulate.json"));
    assert!(rep["linear_deviation"].as_f64().unwrap() < 1e-9);
    assert!(!out(d.path(), "sim_0.5hz.csv").exists());
}

#[test]
fn track_five_hertz_ordering() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"references": [{"kind": "sine", "name": "sine_5hz", "freq_hz": 5.0, "amplitude": 2e-4}],
                  "checks": ["rms_error_5hz_ordering"]}"#;
    let o = run("track", cfg, d.path(), true);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(out(d.path(), "report.json"));
    assert_eq!(rep["runs"].as_array().unwrap().len(), 3);
    let trace = std::fs::read_to_string(out(d.path(), "traces/pid_sine_5hz.csv")).unwrap();
    assert!(trace.starts_with("t,e,u,y,control_input,reset_flag\n"));
}

#[test]
fn track_unknown_check_is_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"references": [{"kind": "sine", "name": "s", "freq_hz": 5.0, "amplitude": 2e-4}],
                  "checks": ["no_such_check"], "output": {"formats": []}}"#;
    assert_eq!(code(&run("track", cfg, d.path(), true)), 2);
}

#[test]
fn track_divergent_controller_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"controllers": [{"kind": "pid", "omega_i_hz": 10, "omega_d_hz": 27, "omega_t_hz": 370,
                                   "omega_f_hz": 1000, "k_p": 1e4}],
                  "references": [{"kind": "sine", "name": "s", "freq_hz": 5.0, "amplitude": 2e-4}]}"#;
    let o = run("track", cfg, d.path(), false);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not stable"));
}

#[test]
fn help_mentions_units() {
    let o = Command::new(env!("CARGO_BIN_EXE_resetshape"))
        .arg("--help")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Hz") && text.contains("degrees"));
}
