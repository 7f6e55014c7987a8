use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_feigen2d"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn verdicts(doc: &Value) -> Vec<(String, String, Value)> {
    doc["stages"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["certificates"].as_array().unwrap().clone())
        .map(|c| (c["claim_id"].as_str().unwrap().to_string(), c["verdict"].as_str().unwrap().to_string(), c["bound"].clone()))
        .collect()
}

#[test]
fn cascade_csv_has_the_exact_bifurcations() {
    let out = run(&["cascade", "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let a: Vec<f64> = rd.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(a.len(), 3);
    assert!((a[0] - 3.0).abs() < 1e-9 && (a[1] - 4.0).abs() < 1e-6);
}

#[test]
fn cascade_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("run");
    let out = run(&["cascade", "--kmax", "4", "--precision", "double", "--out", prefix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run.csv").exists());
    let summary = manifest(&dir.path().join("run.json"));
    assert_eq!(summary["records"].as_array().unwrap().len(), 4);
    assert!(summary["ratio"]["accelerated"].as_f64().unwrap() > 8.0);
}

#[test]
fn converged_seed_takes_no_newton_steps() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("s8.csv");
    let c = coeffs.to_str().unwrap();
    let first = run(&["fixed-point", "--degree", "8", "--tol", "1e-6", "--no-spectrum", "--dump-coeffs", c]);
    assert_eq!(first.status.code(), Some(0));
    let again = run(&["fixed-point", "--degree", "8", "--tol", "1e-6", "--no-spectrum", "--seed", c]);
    assert_eq!(again.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(doc["stages"][0]["report"]["steps"], 0);
}

#[test]
fn float_regions_are_observed_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let out = run(&["verify-regions", "--mode", "float", "--depth", "8", "--cover-depth", "4", "--manifest", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (verdicts(&manifest(&paths[0])), verdicts(&manifest(&paths[1])));
    assert_eq!(a, b);
    assert!(a.iter().all(|(_, v, _)| v == "observed"), "{a:?}");
}

#[test]
fn failed_claims_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("n.json");
    let out = run(&["norms", "--mode", "float", "--depth", "3", "--manifest", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let doc = manifest(&p);
    assert_eq!(doc["exit_code"], 2);
    let v = verdicts(&doc);
    assert!(v.iter().any(|(id, verdict, _)| id == "N.A1" && verdict == "failed"));
    assert!(v.iter().any(|(id, verdict, _)| id == "N.omega" && verdict == "observed"));
}

#[test]
fn stable_set_emits_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let out = run(&["stable-set", "--mode", "float", "--depth", "4", "--base-depth", "2", "--certify", "--emit-points", pts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&pts).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("piece")).count(), 16);
    assert_eq!(text.lines().filter(|l| l.starts_with("orbit")).count(), 16);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let v = verdicts(&doc);
    assert!(v.iter().any(|(id, verdict, _)| id == "C.pieces_structural" && verdict == "verified"));
}

#[test]
fn usage_and_stage_errors() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["fixed-point", "--mode", "exact"]).status.code(), Some(64));
    assert_eq!(run(&["fixed-point", "--degree", "100"]).status.code(), Some(10));
    assert_eq!(run(&["cascade", "--kmax", "0"]).status.code(), Some(15));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
