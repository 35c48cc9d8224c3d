//! End-to-end checks of the `curverad` binary: exit codes, output layout,
//! determinism across reruns and thread counts, and config echo round-trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bundled(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

/// Fresh per-test directory; wiped first so reruns never see stale output.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("curverad-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curverad"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Serialized comparison catches formatting drift as well as value drift.
fn result_text(doc: &Value) -> String {
    serde_json::to_string(&doc["result"]).unwrap()
}

#[test]
fn jsr_brackets_the_pair_growth_rate() {
    let dir = scratch("jsr-pair");
    let out = dir.to_str().unwrap();
    run_ok(&["jsr", "--config", &bundled("matrix-pair-jsr.json"), "--out", out]);

    let doc = read_json(&dir.join("jsr.json"));
    let lower = doc["result"]["lower"].as_f64().unwrap();
    let upper = doc["result"]["upper"].as_f64().unwrap();
    let golden = ((1.0 + 5.0f64.sqrt()) / 2.0).ln();
    assert!(lower <= golden && golden <= upper, "[{lower}, {upper}] misses {golden}");
    assert!(upper - lower <= 0.05, "bracket width {}", upper - lower);

    let csv = fs::read_to_string(dir.join("jsr.csv")).unwrap();
    assert!(csv.starts_with("n,upper,lower\n"));
    assert_eq!(csv.lines().count(), 21, "header plus one row per level up to n = 20");

    // Only the two declared outputs may appear.
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["jsr.csv", "jsr.json"]);
}

#[test]
fn explicit_surface_matches_preset() {
    let dir = scratch("surface-vs-preset");
    let preset_cfg = dir.join("preset.json");
    fs::write(
        &preset_cfg,
        r#"{
  "system": {"kind": "full_shift", "alphabet": 2},
  "target": {"kind": "lamination", "preset": "punctured_torus"},
  "cocycle": ["L", "R"],
  "params": {"n": 8, "k_max": 3}
}
"#,
    )
    .unwrap();

    let preset_out = dir.join("preset-out");
    let surface_out = dir.join("surface-out");
    run_ok(&["jsr", "--config", preset_cfg.to_str().unwrap(), "--out", preset_out.to_str().unwrap()]);
    run_ok(&["jsr", "--config", &bundled("torus-surface-jsr.json"), "--out", surface_out.to_str().unwrap()]);

    let a = read_json(&preset_out.join("jsr.json"));
    let b = read_json(&surface_out.join("jsr.json"));
    assert_eq!(result_text(&a), result_text(&b));
}

#[test]
fn results_are_identical_across_threads_and_reruns() {
    let dir = scratch("determinism");
    let cfg = bundled("matrix-pair-zero-temp.json");
    let mut texts = Vec::new();
    for (sub, threads) in [("t1", "1"), ("t4", "4"), ("t1-again", "1")] {
        let out = dir.join(sub);
        run_ok(&["zero-temp", "--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        texts.push(result_text(&read_json(&out.join("zero-temp.json"))));
    }
    assert_eq!(texts[0], texts[1], "thread count changed the result");
    assert_eq!(texts[0], texts[2], "rerun changed the result");
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = scratch("round-trip");
    let cfg = dir.join("drift.json");
    fs::write(
        &cfg,
        r#"{
  "system": {"kind": "full_shift", "alphabet": 2},
  "target": {
    "kind": "matrix",
    "dimension": 2,
    "generators": {"A": [[1, 1], [0, 1]], "B": [[1, 0], [1, 1]]}
  },
  "cocycle": ["A", "B"],
  "params": {"n": 2000, "chain": {"kind": "bernoulli", "p": [0.5, 0.5]}}
}
"#,
    )
    .unwrap();

    let first = dir.join("first");
    run_ok(&["lyapunov", "--config", cfg.to_str().unwrap(), "--seed", "9", "--out", first.to_str().unwrap()]);
    let doc = read_json(&first.join("lyapunov.json"));
    assert_eq!(doc["config"]["seed"], 9, "flag seed should land in the echo");

    // Rerunning the echoed config without the flag must reproduce the run.
    let echo_cfg = dir.join("echo.json");
    fs::write(&echo_cfg, serde_json::to_string_pretty(&doc["config"]).unwrap()).unwrap();
    let second = dir.join("second");
    run_ok(&["lyapunov", "--config", echo_cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    let redo = read_json(&second.join("lyapunov.json"));
    assert_eq!(result_text(&doc), result_text(&redo));
}

#[test]
fn malformed_json_reports_the_line() {
    let dir = scratch("bad-syntax");
    let cfg = dir.join("bad.json");
    fs::write(&cfg, "{\n  \"system\": {\"kind\": \"full_shift\",, \"alphabet\": 2}\n}\n").unwrap();
    let out = run(&["jsr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json:2"), "stderr: {stderr}");
}

#[test]
fn unknown_top_level_key_is_rejected() {
    let dir = scratch("bad-key");
    let cfg = dir.join("extra.json");
    fs::write(
        &cfg,
        "{\n  \"system\": {\"kind\": \"full_shift\", \"alphabet\": 2},\n  \"oops\": true\n}\n",
    )
    .unwrap();
    let out = run(&["jsr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown field \"oops\""), "stderr: {stderr}");
    assert!(stderr.contains("extra.json:3"), "stderr: {stderr}");
}

#[test]
fn unknown_generator_is_rejected() {
    let dir = scratch("bad-generator");
    let cfg = dir.join("missing.json");
    fs::write(
        &cfg,
        r#"{
  "system": {"kind": "full_shift", "alphabet": 2},
  "target": {
    "kind": "matrix",
    "dimension": 2,
    "generators": {"A": [[1, 1], [0, 1]], "B": [[1, 0], [1, 1]]}
  },
  "cocycle": ["A", "C"],
  "params": {"n": 4, "k_max": 2}
}
"#,
    )
    .unwrap();
    let out = run(&["jsr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown generator \"C\""), "stderr: {stderr}");
}

#[test]
fn lamination_oracle_suite_passes_end_to_end() {
    let dir = scratch("oracle");
    let out = dir.to_str().unwrap();
    run_ok(&["oracle-check", "--config", &bundled("torus-oracle.json"), "--out", out]);
    let doc = read_json(&dir.join("oracle-check.json"));
    assert_eq!(doc["result"]["all_passed"], true);
    assert_eq!(doc["result"]["suite"], "lamination");
}

#[test]
fn full_shift_pressure_at_zero_is_exactly_ln_2() {
    let dir = scratch("pressure-exact");
    let out = dir.to_str().unwrap();
    run_ok(&["pressure", "--config", &bundled("matrix-pair-pressure.json"), "--out", out]);
    let doc = read_json(&dir.join("pressure.json"));
    let values = doc["result"]["values"].as_array().unwrap();
    assert_eq!(values[0]["q"], 0.0);
    assert_eq!(values[0]["pressure"].as_f64().unwrap(), std::f64::consts::LN_2);
}

#[test]
fn non_convergence_is_flagged_but_not_an_error() {
    let dir = scratch("flagged");
    let cfg = dir.join("tight.json");
    fs::write(
        &cfg,
        r#"{
  "system": {"kind": "full_shift", "alphabet": 2},
  "target": {
    "kind": "matrix",
    "dimension": 2,
    "generators": {"A": [[1, 1], [0, 1]], "B": [[1, 0], [1, 1]]}
  },
  "cocycle": ["A", "B"],
  "params": {"eps": 0.0001, "n0": 8, "seeds": [0]}
}
"#,
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = run_ok(&[
        "periodic-approx",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("did not converge"), "stderr: {stderr}");
    let doc = read_json(&out_dir.join("periodic-approx.json"));
    assert_eq!(doc["result"]["successes"], 0);
    assert_eq!(doc["result"]["runs"][0]["converged"], false);
}
