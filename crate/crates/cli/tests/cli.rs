//! End-to-end checks of the command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtlab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mtlab-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bootstrap_runs_and_writes_reports() {
    let dir = temp_dir("bootstrap");
    let config = write_config(
        &dir,
        "bootstrap.json",
        r#"{ "experiment": "bootstrap", "alpha": 1.0, "beta": 0.5,
             "bootstrap": { "c0": 4.0, "m_const": 1.0, "k_max": 60 } }"#,
    );
    let out = dir.join("out");
    let output = bin()
        .args(["bootstrap", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("beta_k - alpha"), "stdout: {stdout}");
    assert!(out.join("bootstrap.json").exists());
    assert!(out.join("bootstrap_trace.csv").exists());
    assert!(out.join("bootstrap_trace.svg").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sequential_reruns_are_byte_identical() {
    let dir = temp_dir("determinism");
    let config = write_config(
        &dir,
        "mt.json",
        r#"{ "experiment": "mt_ratio",
             "measure": { "family": "flat_segment", "nodes": 128 },
             "density": { "kind": "random_phases", "seed": 9 },
             "grid": { "l": 4.0, "n": 32 },
             "family": { "kind": "perp", "v": [1.0, 0.0] },
             "q": 2.5 }"#,
    );
    let run = |out: &Path| {
        let output = bin()
            .args(["mt-ratio", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .arg("--seq")
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        fs::read(out.join("mt_ratio.json")).unwrap()
    };
    let a = run(&dir.join("out1"));
    let b = run(&dir.join("out2"));
    assert_eq!(a, b, "sequential reruns differ");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn overrides_and_seed_flags_reach_the_config() {
    let dir = temp_dir("override");
    let config = write_config(
        &dir,
        "search.json",
        r#"{ "experiment": "search",
             "measure": { "family": "circle", "nodes": 16 },
             "weight": { "kind": "tensor", "profile": "interval", "lo": -1.0, "hi": 1.0 },
             "family": { "kind": "slope", "m": 1.0 },
             "grid": { "l": 4.0, "n": 16 },
             "q": 4.5, "iterations": 5 }"#,
    );
    let out = dir.join("out");
    let output = bin()
        .args(["search", "--config"])
        .arg(&config)
        .args(["--set", "iterations=3", "--seed", "77", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("search.json")).unwrap()).unwrap();
    let echo: serde_json::Value =
        serde_json::from_str(report["config_echo"].as_str().unwrap()).unwrap();
    assert_eq!(echo["iterations"], 3);
    assert_eq!(echo["seed"], 77);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_produce_single_line_diagnostics_and_nonzero_exit() {
    let dir = temp_dir("errors");
    // unknown key
    let config = write_config(&dir, "bad.json", r#"{ "experiment": "bootstrap", "foo": 1 }"#);
    let output = bin().args(["bootstrap", "--config"]).arg(&config).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert_eq!(stderr.lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.contains("foo"));

    // out-of-range value names the key
    let config = write_config(
        &dir,
        "range.json",
        r#"{ "experiment": "bootstrap", "alpha": 3.0 }"#,
    );
    let output = bin().args(["bootstrap", "--config"]).arg(&config).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("alpha"));

    // missing file
    let output = bin()
        .args(["bootstrap", "--config"])
        .arg(dir.join("nope.json"))
        .output()
        .unwrap();
    assert!(!output.status.success());

    // subcommand/config mismatch
    let config = write_config(&dir, "mismatch.json", r#"{ "experiment": "bootstrap" }"#);
    let output = bin().args(["decay", "--config"]).arg(&config).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("bootstrap"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn hypotheses_subcommand_reports_the_verdict() {
    let dir = temp_dir("hyp");
    let config = write_config(
        &dir,
        "hyp.json",
        r#"{ "experiment": "hypotheses",
             "measure": { "family": "exp_flat", "m": 2, "c": 0.3 },
             "hypothesis_grid": 200 }"#,
    );
    let out = dir.join("out");
    let output = bin()
        .args(["hypotheses", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("all hypotheses satisfied"), "stdout: {stdout}");
    assert!(stdout.contains("C ="));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn decay_subcommand_fits_the_circle_exponent() {
    let dir = temp_dir("decay");
    let config = write_config(
        &dir,
        "circle.json",
        r#"{ "experiment": "decay",
             "measure": { "family": "circle", "nodes": 2048 },
             "family": { "kind": "perp", "v": [1.0, 0.0] },
             "decay": { "regime": "directional", "gauge_min": 1.0, "gauge_max": 50.0,
                        "samples": 256 } }"#,
    );
    let out = dir.join("out");
    let output = bin()
        .args(["decay", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("decay.json")).unwrap()).unwrap();
    let delta = report["scalars"]
        .as_array()
        .unwrap()
        .iter()
        .find(|kv| kv[0] == "delta_hat")
        .map(|kv| kv[1].as_f64().unwrap())
        .unwrap();
    assert!((0.4..0.65).contains(&delta), "delta = {delta}");
    fs::remove_dir_all(&dir).ok();
}
