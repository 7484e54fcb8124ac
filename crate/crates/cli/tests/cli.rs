use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stiefel_polar::trace::Trace;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stiefel-polar")).current_dir(dir).args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let o = run(dir, args);
    assert_eq!(code(&o), 0, "{args:?}\nstdout: {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    o
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rank_one_hopm_reaches_sidecar_target() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "rank1", "--dims", "4,4,4", "--lambda", "2", "--seed", "3", "--out", "inst"]);
    let target = json(&d.join("inst/truth.json"))["target_objective"].as_f64().unwrap();
    assert_eq!(target, 4.0);
    ok(d, &["solve", "--spec", "inst/spec.json", "--algo", "hopm", "--seed", "1", "--out", "run"]);
    let f = json(&d.join("run/result.json"))["objective"].as_f64().unwrap();
    assert!((f - target).abs() <= 1e-10, "{f}");
}

#[test]
fn full_rank_lmpd_captures_the_whole_norm() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "random", "--dims", "3,4,2", "--family", "compress", "--ranks", "3,4,2", "--seed", "5", "--out", "inst"]);
    ok(d, &["solve", "--spec", "inst/spec.json", "--algo", "lmpd", "--out", "run"]);
    let spec: stiefel_polar::ObjectiveSpec = serde_json::from_value(json(&d.join("inst/spec.json"))).unwrap();
    let norm2 = spec.tensors()[0].norm().powi(2);
    let f = json(&d.join("run/result.json"))["objective"].as_f64().unwrap();
    assert!((f - norm2).abs() <= 1e-10 * norm2);
}

#[test]
fn generate_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    for out in ["a", "b"] {
        ok(d, &["generate", "--kind", "random", "--dims", "5,5,5", "--seed", "7", "--out", out]);
    }
    for f in ["spec.json", "truth.json"] {
        assert_eq!(std::fs::read(d.join("a").join(f)).unwrap(), std::fs::read(d.join("b").join(f)).unwrap());
    }
}

#[test]
fn negative_gamma_is_rejected_before_running() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "random", "--dims", "3,3,3", "--family", "compress", "--ranks", "2,2,2", "--out", "inst"]);
    let o = run(d, &["solve", "--spec", "inst/spec.json", "--algo", "lmpd-s", "--gamma", "-0.5", "--out", "run"]);
    assert_eq!(code(&o), 2);
    assert!(!d.join("run").exists());
}

#[test]
fn bad_inputs_exit_with_validation_code() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&run(d, &["solve", "--spec", "missing.json", "--algo", "lmpd", "--out", "run"])), 2);
    assert_eq!(code(&run(d, &["generate", "--kind", "tucker", "--dims", "3,3", "--out", "x"])), 2);
    std::fs::write(d.join("m.json"), r#"{"spec":"s.json","algorithm":"lmpd","trace":"t.csv","result":"r.json","bogus":1}"#).unwrap();
    assert_eq!(code(&run(d, &["solve", "--manifest", "m.json"])), 2);
    ok(d, &["generate", "--kind", "random", "--dims", "3,3,3", "--out", "inst"]);
    assert_eq!(code(&run(d, &["solve", "--spec", "inst/spec.json", "--algo", "lmpd", "--out", "run"])), 2);
}

#[test]
fn manifest_runs_are_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "random", "--dims", "4,3,4", "--rank", "2", "--dagger", "t", "--seed", "2", "--out", "inst"]);
    let manifest = r#"{"spec":"inst/spec.json","algorithm":"apdoi-s","seed":9,"max_sweeps":50,"trace":"out/trace.csv","result":"out/result.json","no_timing":true}"#;
    std::fs::write(d.join("m.json"), manifest).unwrap();
    ok(d, &["solve", "--manifest", "m.json"]);
    let first = std::fs::read(d.join("out/trace.csv")).unwrap();
    ok(d, &["solve", "--manifest", "m.json"]);
    assert_eq!(first, std::fs::read(d.join("out/trace.csv")).unwrap());
    ok(d, &["check", "--which", "monotone", "--trace", "out/trace.csv"]);
}

#[test]
fn checks_report_and_set_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "random", "--dims", "3,4,3", "--rank", "2", "--seed", "4", "--out", "rnd"]);
    ok(d, &["check", "--which", "grad", "--spec", "rnd/spec.json", "--out", "grad.json"]);
    let report = json(&d.join("grad.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert!(report["details"]["max_relative_error"].as_f64().unwrap() <= 1e-6);

    ok(d, &["solve", "--spec", "rnd/spec.json", "--algo", "apdoi", "--max-sweeps", "3", "--out", "short"]);
    assert_eq!(code(&run(d, &["check", "--which", "rate", "--trace", "short/trace.csv"])), 4);
    assert_eq!(code(&run(d, &["check", "--which", "hessrank", "--spec", "rnd/spec.json", "--point", "short/result.json"])), 4);
}

#[test]
fn hessrank_on_compression_instance_is_maximal() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "prop710", "-n", "5", "-r", "2", "-l", "2", "-d", "3", "--seed", "8", "--out", "inst"]);
    ok(d, &["solve", "--spec", "inst/spec.json", "--algo", "lmpd", "--init", "inst/truth.json", "--out", "run"]);
    ok(d, &["check", "--which", "hessrank", "--spec", "inst/spec.json", "--point", "run/result.json", "--out", "h.json"]);
    for b in json(&d.join("h.json"))["details"]["blocks"].as_array().unwrap() {
        assert_eq!(b["rank"].as_u64(), Some(2 * 2 * (5 - 2)));
    }
}

#[test]
fn symmetric_solve_and_checks() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["generate", "--kind", "prop65", "-n", "4", "-r", "2", "-l", "2", "--seed", "3", "--out", "inst"]);
    ok(d, &["check", "--which", "hessrank", "--spec", "inst/spec.json", "--point", "inst/truth.json"]);
    ok(d, &["check", "--which", "grad", "--spec", "inst/spec.json"]);
    ok(d, &["solve", "--spec", "inst/spec.json", "--algo", "pdoi-s", "--max-sweeps", "100", "--out", "run"]);
    ok(d, &["check", "--which", "monotone", "--trace", "run/trace.csv"]);
    assert_eq!(json(&d.join("run/result.json"))["factors"].as_array().unwrap().len(), 1);
}

#[test]
fn bench_writes_replayable_traces() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let o = Command::new(env!("CARGO_BIN_EXE_stiefel-polar"))
        .current_dir(d)
        .env("STIEFEL_POLAR_THREADS", "2")
        .args(["bench", "--example", "ex711", "--seeds", "0", "--out", "b", "--no-timing"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(d.join("b/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 6);
    let long = std::fs::read_to_string(d.join("b/long.csv")).unwrap();
    assert!(long.starts_with("example,ranks,seed,algorithm,sweep,objective,step_norm"));
    let traces: Vec<_> = std::fs::read_dir(d.join("b/traces")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(traces.len(), 6);
    for t in &traces {
        assert!(!Trace::load(t).unwrap().is_empty());
        ok(d, &["check", "--which", "monotone", "--trace", t.to_str().unwrap()]);
    }
    let s = json(&d.join("b/summary.json"));
    assert_eq!(s["cells"], 6);
    assert_eq!(s["lmpd_s_total"], 2);
}

#[test]
fn bench_with_no_seeds_succeeds_empty() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["bench", "--example", "ex712", "--seeds", "", "--out", "b"]);
    assert_eq!(std::fs::read_to_string(d.join("b/summary.csv")).unwrap().lines().count(), 1);
    assert_eq!(json(&d.join("b/summary.json"))["cells"], 0);
}

#[test]
fn bad_thread_cap_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_stiefel-polar"))
        .current_dir(tmp.path())
        .env("STIEFEL_POLAR_THREADS", "0")
        .args(["bench", "--example", "ex711", "--seeds", "0", "--out", "b"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
