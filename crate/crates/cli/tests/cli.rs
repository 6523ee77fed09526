//! End-to-end runs of the `driftbound` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driftbound"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn compare_on_homogeneous_heat_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("heat.json");
    let out = run(&["compare", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["timeseries.csv", "certificate.json", "domination.json", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["summary"], "pass");
    assert_eq!(manifest["constants"]["eta_star"], 0.5);
    let report = json(&dir.path().join("domination.json"));
    assert_eq!(report["pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 82);
}

#[test]
fn simulate_writes_only_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("forced_heat.json");
    let out = run(&["simulate", config.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
    assert!(!dir.path().join("certificate.json").exists());
}

#[test]
fn families_report_exact_limits() {
    let dir = tempfile::tempdir().unwrap();
    let params = configs().join("families.json");
    let out = run(&["families", params.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("families.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let ex1_iii = rows.iter().find(|r| &r[0] == "ex1_iii").unwrap();
    // `ell` equals `L` for delta = 0.
    assert_eq!(&ex1_iii[2], "2.0");
    assert_eq!(&ex1_iii[4], "2.0");
    assert!(rows.iter().all(|r| &r[10] == "true"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("heat.json"))
        .unwrap()
        .replace("\"mode\": \"linear\"", "\"mode\": \"linear\", \"colour\": 1");
    let config = write(dir.path(), "bad.json", &text);
    let out = run(&["certify", &config], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "config_error");
    assert!(!dir.path().join("out").join("manifest.json").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "/nonexistent/run.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_expression_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("heat.json"))
        .unwrap()
        .replace("sin(pi*x1)", "sin(pi*x1");
    let config = write(dir.path(), "bad.json", &text);
    let out = run(&["simulate", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_hypothesis_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("compressible_nhl1.json"))
        .unwrap()
        .replace("\"forcing_majorant\": \"exp(-2*t)\"", "\"forcing_majorant\": \"1/(1 + t)\"");
    let config = write(dir.path(), "divergent.json", &text);
    let out = run(&["certify", &config], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "certification_failure");
    assert_eq!(diag["assumption"], "integrable_forcing");
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["summary"], "fail");
    assert_eq!(manifest["error"]["assumption"], "integrable_forcing");
}

#[test]
fn understated_forcing_fails_its_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("forced_heat.json"))
        .unwrap()
        .replace("\"forcing_majorant\": \"exp(-t)\"", "\"forcing_majorant\": \"0.5*exp(-t)\"");
    let config = write(dir.path(), "understated.json", &text);
    let out = run(&["compare", &config], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["summary"], "fail");
    let failures = manifest["failures"].as_array().unwrap();
    assert!(failures.iter().any(|f| f.as_str().unwrap().contains("forcing_majorant")), "{failures:?}");
}
