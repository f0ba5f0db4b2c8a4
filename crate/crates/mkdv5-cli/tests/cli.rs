use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mkdv5(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkdv5")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of the CSV as numbers, header checked.
fn read_csv(p: &Path, header: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

const HEADER: &str = "t,E0,E1,E2,E3,L2,Hs,mass_drift,step_ms";

#[test]
fn zero_preset_gives_zero_diagnostics_and_a_sidecar() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "zero.json", r#"{"preset": "zero", "solver": {"K": 8, "dt": 1e-4, "t_final": 1e-3}}"#);
    let out = dir.path().join("zero.csv");
    let o = mkdv5(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out, HEADER);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!(r[1..].iter().all(|&v| v == 0.0), "{r:?}");
    }
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("zero.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["preset"], "zero");
    assert_eq!(meta["config"]["solver"]["K"], 8);
}

#[test]
fn integrable_preset_conserves_energies_and_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "int.json", r#"{"preset": "integrable", "solver": {"K": 16, "dt": 1e-5, "t_final": 1e-3, "sample_every": 10}}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&mkdv5(&["simulate", "--config", s(&cfg), "--out", s(&a)])), 0);
    assert_eq!(code(&mkdv5(&["simulate", "--config", s(&cfg), "--out", s(&b), "--threads", "1"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(sidecar(&a)).unwrap().len(), std::fs::read(sidecar(&b)).unwrap().len());
    let rows = read_csv(&a, HEADER);
    for j in 2..=4 {
        let e0 = rows[0][j];
        for r in &rows {
            assert!((r[j] - e0).abs() <= 1e-7 * e0.abs(), "E{} drifts: {} vs {e0}", j - 1, r[j]);
        }
    }
}

fn sidecar(p: &Path) -> PathBuf {
    p.with_extension("meta.json")
}

#[test]
fn nf_simulate_appends_picard_column() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "nf.json",
        r#"{"preset": "small-data", "solver": {"K": 8, "L": 4, "dt": 1e-4, "t_final": 5e-4}}"#,
    );
    let out = dir.path().join("nf.csv");
    let o = mkdv5(&["nf-simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out, &format!("{HEADER},picard_iters"));
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r[9] >= 2.0));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(&dir, "bad.json", "{ not json");
    assert_eq!(code(&mkdv5(&["simulate", "--config", s(&bad)])), 64);
    assert_eq!(code(&mkdv5(&["simulate"])), 64);
    assert_eq!(code(&mkdv5(&["frobnicate"])), 64);
    assert_eq!(code(&mkdv5(&["certify", "no-such-suite"])), 64);
    assert_eq!(code(&mkdv5(&["counterexample", "--N", "6", "--n", "10"])), 64);

    // explicit steps cannot follow the cubic stiffness at K = 64 with this step
    let stiff = write_config(&dir, "stiff.json", r#"{"preset": "integrable", "solver": {"K": 64, "dt": 1e-5, "t_final": 1e-3}}"#);
    let out = dir.path().join("stiff.csv");
    assert_eq!(code(&mkdv5(&["simulate", "--config", s(&stiff), "--out", s(&out)])), 2);

    let picard = write_config(
        &dir,
        "picard.json",
        r#"{"preset": "small-data", "solver": {"K": 8, "L": 1, "dt": 1e-4, "t_final": 1e-4, "picard_max_iters": 1}}"#,
    );
    assert_eq!(code(&mkdv5(&["nf-simulate", "--config", s(&picard), "--out", s(&out)])), 3);
}

#[test]
fn certify_reports_and_fails_under_perturbation() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ce.json");
    let o = mkdv5(&["certify", "counterexample", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 2);

    let list = mkdv5(&["certify", "--list"]);
    let text = String::from_utf8(list.stdout).unwrap();
    assert!(text.lines().count() > 50);
    assert!(text.contains("nf-identity-end-to-end"));

    let e2e = ["certify", "nf-identity", "--check", "nf-identity-end-to-end"];
    assert_eq!(code(&mkdv5(&e2e)), 0);
    let mut perturbed = e2e.to_vec();
    perturbed.push("--perturb");
    assert_eq!(code(&mkdv5(&perturbed)), 1);
}

#[test]
fn counterexample_rows() {
    let o = mkdv5(&["counterexample", "--N", "4", "--n", "40"]);
    assert_eq!(code(&o), 0);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ratio = rows[0]["ratio"].as_f64().unwrap();
    assert!((ratio * 1600.0 / 10.0 - 1.0).abs() < 0.3, "{ratio}");
}
