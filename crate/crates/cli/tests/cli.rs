use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const UNIFORM_PSI_U: &str = r#"{
  "base": {"kind": "uniform", "lo": 0, "hi": 1},
  "perturbation": {"mode": "single", "wavelets": [{"family": "psi_u"}]}
}"#;

const LEVEL4: &str = r#"{
  "base": {"kind": "uniform"},
  "perturbation": {
    "mode": "level4",
    "wavelets": [
      {"family": "beta", "alpha": 4, "beta": 3},
      {"family": "beta", "alpha": 3, "beta": 7},
      {"family": "beta", "alpha": 5, "beta": 3},
      {"family": "beta", "alpha": 2, "beta": 7}
    ]
  }
}"#;

fn write(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn wavpert(args: &[&str], spec: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavpert"))
        .args(args)
        .arg("--spec")
        .arg(spec)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_three_point_grid() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", UNIFORM_PSI_U);
    let o = wavpert(&["eval", "--grid", "3"], &spec);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next().unwrap(), "x,cdf_base,cdf_new,pdf_base,pdf_new");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[2][0], 1.0);
    assert!(rows[0][2].abs() < 1e-12);
    assert!((rows[1][2] - 0.524_143_4).abs() < 1e-6);
    assert!((rows[2][2] - 1.0).abs() < 1e-12);
}

#[test]
fn validate_level4_passes() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", LEVEL4);
    let o = wavpert(&["validate"], &spec);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passes"], serde_json::Value::Bool(true));
    assert_eq!(report["monotone"], serde_json::Value::Bool(true));
}

#[test]
fn sample_is_reproducible_and_writes_file() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", UNIFORM_PSI_U);
    let a = wavpert(&["sample", "--n", "50", "--seed", "7"], &spec);
    let b = wavpert(&["sample", "--n", "50", "--seed", "7"], &spec);
    let c = wavpert(&["sample", "--n", "50", "--seed", "8"], &spec);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(stdout(&a).lines().count(), 50);

    let out = dir.path().join("samples.txt");
    let d = wavpert(&["sample", "--n", "50", "--seed", "7", "--out", out.to_str().unwrap()], &spec);
    assert_eq!(d.status.code(), Some(0));
    assert!(d.stdout.is_empty());
    assert_eq!(fs::read(&out).unwrap(), a.stdout);
}

#[test]
fn moments_table() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", UNIFORM_PSI_U);
    let o = wavpert(&["moments", "--kmax", "2"], &spec);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,base_moment,correction,new_moment,direct_check,residual");
    assert_eq!(lines.len(), 4);
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - 35.0 / 72.0).abs() < 1e-9);
    assert!(row[5] < 1e-6);
}

#[test]
fn fit_reports_parameters() {
    let dir = TempDir::new().unwrap();
    let truth = write(&dir, "truth.json", LEVEL4);
    let sample = wavpert(&["sample", "--n", "400", "--seed", "3"], &truth);
    let data = write(&dir, "data.txt", &stdout(&sample));
    let spec = write(
        &dir,
        "fit.json",
        r#"{"base": {"kind": "uniform"}, "perturbation": {"mode": "level2"}}"#,
    );
    let o = wavpert(&["fit", "--data", data.to_str().unwrap(), "--budget", "100"], &spec);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["parameters"].as_array().unwrap().len(), 2);
    assert!(doc["ks_after"].as_f64().unwrap() <= doc["ks_before"].as_f64().unwrap());
    assert_eq!(doc["spec"]["perturbation"]["mode"], "level2");
}

#[test]
fn malformed_json_reports_location() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "bad.json", "{\n  \"base\": {\"kind\": \"uniform\"},\n  oops\n}");
    let o = wavpert(&["eval"], &spec);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_spec_exits_2() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "s.json",
        r#"{"base": {"kind": "uniform"}, "perturbation": {"mode": "single", "wavelets": [{"family": "beta", "alpha": 4}]}}"#,
    );
    let o = wavpert(&["eval"], &spec);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: invalid spec"));

    let gain = write(
        &dir,
        "g.json",
        r#"{"base": {"kind": "normal"}, "perturbation": {"mode": "single", "gain": 1.5, "wavelets": [{"family": "psi_u"}]}}"#,
    );
    assert_eq!(wavpert(&["eval"], &gain).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", UNIFORM_PSI_U);
    assert_eq!(wavpert(&["sample"], &spec).status.code(), Some(2));
    assert_eq!(wavpert(&["validate", "--grid", "10"], &spec).status.code(), Some(2));
    assert_eq!(wavpert(&["eval", "--nonsense"], &spec).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(wavpert(&["eval"], &missing).status.code(), Some(2));
}

#[test]
fn bad_data_line_is_reported() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "s.json", r#"{"base": {"kind": "uniform"}, "perturbation": {"mode": "single"}}"#);
    let data = write(&dir, "d.txt", "0.1\n\n0.2\nabc\n");
    let o = wavpert(&["fit", "--data", data.to_str().unwrap()], &spec);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}
