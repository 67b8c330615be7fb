use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qcpu_sim::cli::RunConfig;
use qcpu_sim::grid::Wavefunction;
use serde_json::Value;

fn qcpu_sim(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcpu-sim"));
    cmd.args(args).env_remove("QCPU_SIM_OUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("QCPU_SIM_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn snapshot_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot_"))
        .collect();
    names.sort();
    names
}

#[test]
fn verify_identities_default_seed_passes() {
    let work = tempfile::tempdir().unwrap();
    let report = work.path().join("report.json");
    let out = qcpu_sim(
        &[
            "verify-identities",
            "--seed",
            "42",
            "--dim",
            "8",
            "--out",
            report.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    for check in v["identities"].as_array().unwrap() {
        assert!(check["max_error"].as_f64().unwrap() <= 1e-12, "{check}");
    }
}

#[test]
fn verify_identities_rejects_zero_dimension() {
    let out = qcpu_sim(&["verify-identities", "--dim", "0"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = qcpu_sim(&["verify-identities", "--dim", "65"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_identities_report_is_deterministic() {
    let a = qcpu_sim(&["verify-identities", "--seed", "9"], None);
    let b = qcpu_sim(&["verify-identities", "--seed", "9"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn harmonic_revival_run() {
    let work = tempfile::tempdir().unwrap();
    let omega = 1.5;
    let period = 2.0 * PI / omega;
    let config = format!(
        r#"{{"system": {{"kind": "harmonic", "omega": {omega}}},
            "grid": {{"L": 1.0, "k": 4}},
            "evolution": {{"dt": {}, "total_time": {period}}},
            "initial_state": {{"table": [{}]}},
            "outputs": {{"snapshot_every": 100, "directory": "out"}}}}"#,
        period / 400.0,
        (0..16)
            .map(|m| format!("[{}, {}]", 1.0 + m as f64, 0.5 - m as f64 * 0.1))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let path = write_config(work.path(), &config);
    let out = qcpu_sim(&["simulate", "--config", &path], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let dir = work.path().join("out");
    let s = summary(&dir);
    assert_eq!(s["steps"], 400);
    assert!((s["fidelity_to_initial"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert!((s["final_fidelity"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert_eq!(
        snapshot_files(&dir),
        ["000000", "000100", "000200", "000300", "000400"]
            .iter()
            .map(|s| format!("snapshot_{s}.jsonl"))
            .collect::<Vec<_>>()
    );

    let last =
        Wavefunction::from_jsonl(&fs::read_to_string(dir.join("snapshot_000400.jsonl")).unwrap())
            .unwrap();
    assert!((last.time() - period).abs() < 1e-12);
    assert!((last.norm_sqr() - 1.0).abs() < 1e-12);

    let csv = fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("step,time,norm_sq,drift\n"));
    assert_eq!(csv.lines().count(), 402);

    let echo: RunConfig = serde_json::from_value(s["config"].clone()).unwrap();
    echo.validate().unwrap();
}

#[test]
fn residual_step_rule_is_a_config_error() {
    let work = tempfile::tempdir().unwrap();
    let path = write_config(
        work.path(),
        r#"{"system": {"kind": "free_particle", "mu": 1.0},
            "grid": {"L": 20.0, "k": 5, "centered": true},
            "evolution": {"dt": 0.3, "total_time": 1.0},
            "initial_state": {"gaussian": {"x0": 0.0, "p0": 1.0, "sigma": 1.5}},
            "outputs": {"directory": "out"}}"#,
    );
    let out = qcpu_sim(&["simulate", "--config", &path], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("residual-step rule"),
        "{}",
        stderr(&out)
    );
    assert!(!work.path().join("out").join("summary.json").exists());
}

#[test]
fn zero_total_time_gives_one_snapshot() {
    let work = tempfile::tempdir().unwrap();
    let out_dir = work.path().join("elsewhere");
    let path = write_config(
        work.path(),
        r#"{"system": {"kind": "constant_field", "mu": 1.0, "u": 2.0},
            "grid": {"L": 16.0, "k": 4, "centered": true},
            "evolution": {"auto_epsilon": 0.01, "total_time": 0.0},
            "initial_state": {"gaussian": {"x0": 0.0, "p0": 0.5, "sigma": 2.0}},
            "outputs": {"snapshot_every": 5, "directory": "ignored"}}"#,
    );
    let out = qcpu_sim(&["simulate", "--config", &path], Some(&out_dir));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        snapshot_files(&out_dir),
        vec!["snapshot_000000.jsonl".to_string()]
    );
    assert_eq!(summary(&out_dir)["final_fidelity"], 1.0);
    assert!(!work.path().join("ignored").exists());
}

#[test]
fn config_errors_report_field_and_line() {
    let work = tempfile::tempdir().unwrap();
    let path = write_config(
        work.path(),
        "{\"system\": {\"kind\": \"harmonic\", \"omega\": 1.0},\n\
         \"grid\": {\"L\": 1.0, \"k\": \"three\"},\n\
         \"evolution\": {\"dt\": 0.1, \"total_time\": 1.0},\n\
         \"initial_state\": {\"basis_state\": 0},\n\
         \"outputs\": {\"directory\": \"out\"}}",
    );
    let out = qcpu_sim(&["simulate", "--config", &path], None);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("grid.k") && msg.contains("line 2"), "{msg}");

    let missing = qcpu_sim(&["simulate", "--config", "/nonexistent/run.json"], None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_blow_up_exits_one_without_snapshots() {
    let work = tempfile::tempdir().unwrap();
    let path = write_config(
        work.path(),
        r#"{"system": {"kind": "grid_schrodinger", "mu": 1.0,
                       "potential": {"form": "table", "values": [1e300, 0, 0, 0, 0, 0, 0, 0]}},
            "grid": {"L": 8.0, "k": 3},
            "evolution": {"dt": 0.5, "total_time": 5.0},
            "initial_state": {"basis_state": 0},
            "outputs": {"directory": "out"}}"#,
    );
    let out = qcpu_sim(&["simulate", "--config", &path], None);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("non-finite"), "{}", stderr(&out));
    let dir = work.path().join("out");
    assert!(snapshot_files(&dir).is_empty());
    assert!(!dir.join("summary.json").exists());
}

#[test]
fn locked_directory_is_refused() {
    let work = tempfile::tempdir().unwrap();
    let dir = work.path().join("out");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join(".qcpu-sim.lock"), "1").unwrap();
    let path = write_config(
        work.path(),
        r#"{"system": {"kind": "harmonic", "omega": 1.0},
            "grid": {"L": 1.0, "k": 2},
            "evolution": {"dt": 0.1, "total_time": 0.2},
            "initial_state": {"basis_state": 1},
            "outputs": {"directory": "out"}}"#,
    );
    let out = qcpu_sim(&["simulate", "--config", &path], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("in use"), "{}", stderr(&out));
}

#[test]
fn compare_reports_first_order_convergence() {
    let work = tempfile::tempdir().unwrap();
    let path = write_config(
        work.path(),
        r#"{"system": {"kind": "grid_schrodinger", "mu": 1.0, "potential": {"form": "quadratic", "strength": 0.05}},
            "grid": {"L": 16.0, "k": 4, "centered": true},
            "evolution": {"dt": 0.015625, "total_time": 1.0},
            "initial_state": {"gaussian": {"x0": -1.0, "p0": 0.5, "sigma": 1.5}},
            "outputs": {"directory": "out"}}"#,
    );
    let out = qcpu_sim(&["compare", "--config", &path, "--ladder", "4"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["fidelity_network_euler"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    let order = v["convergence_order"].as_f64().unwrap();
    assert!((0.8..=1.2).contains(&order), "order {order}");
    for r in v["ladder"]["ratios"].as_array().unwrap() {
        assert!((0.4..=0.6).contains(&r.as_f64().unwrap()), "{r}");
    }
    assert!(work.path().join("out").join("compare.json").exists());

    let short = qcpu_sim(&["compare", "--config", &path, "--ladder", "2"], None);
    assert_eq!(short.status.code(), Some(2));
}

#[test]
fn spectrum_csv() {
    let work = tempfile::tempdir().unwrap();
    let csv_path = work.path().join("spectrum.csv");
    let out = qcpu_sim(
        &[
            "spectrum",
            "--L",
            "4",
            "--k",
            "2",
            "--mu",
            "1",
            "--out",
            csv_path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][1], 0.0);
    assert_eq!(rows[0][4], 0.0);
    assert!((rows[1][4] - 0.5).abs() < 1e-15);

    let out = qcpu_sim(&["spectrum", "--L", "10", "--k", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[3].abs() <= 1e-10 && f[6].abs() <= 1e-10, "{line}");
    }

    for bad in [["--L", "-1", "--k", "3"], ["--L", "4", "--k", "1"]] {
        let out = qcpu_sim(&["spectrum", bad[0], bad[1], bad[2], bad[3]], None);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
}
