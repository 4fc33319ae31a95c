//! End-to-end checks of the command-line interface: exit codes, report
//! shape, determinism of reruns, and the error JSON contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_scenery-lab");

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scenery-lab-test-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_spec(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("measure.json");
    fs::write(&path, text).unwrap();
    path
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .env("SCENERY_LAB_THREADS", "2")
        .output()
        .unwrap()
}

fn report(out: &Path, command: &str) -> serde_json::Value {
    let text = fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn value_of(report: &serde_json::Value, name: &str, kind: &str) -> f64 {
    report["values"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["name"] == name && v["kind"] == kind)
        .unwrap_or_else(|| panic!("no {kind} value {name}"))["value"]
        .as_f64()
        .unwrap()
}

const CANTOR: &str = r#"{"type":"grid","dim":1,"rule":{"kind":"cantor","alpha":0.25}}"#;

#[test]
fn cone_constant_matches_closed_form_and_reruns_identically() {
    let dir = tmp_dir("cone");
    let args = [
        "cone-constant",
        "--dim",
        "2",
        "--k",
        "1",
        "--alpha",
        "0.5",
        "--samples",
        "200000",
        "--seed",
        "7",
    ];
    let out = run(&dir, &args);
    assert!(out.status.success(), "{out:?}");
    let first = fs::read(dir.join("cone-constant.json")).unwrap();
    let rep = report(&dir, "cone-constant");
    let emp = value_of(&rep, "epsilon", "empirical");
    let exact = value_of(&rep, "epsilon", "closed_form");
    assert!((exact - 1.0 / 6.0).abs() < 1e-12);
    assert!((emp - exact).abs() < 0.005, "{emp}");
    assert!(rep["provenance"]["config_hash"].as_str().unwrap().len() == 64);

    let out = run(&dir, &args);
    assert!(out.status.success());
    assert_eq!(first, fs::read(dir.join("cone-constant.json")).unwrap());
}

#[test]
fn malformed_spec_exits_with_config_code_and_no_files() {
    let dir = tmp_dir("bad");
    let spec = write_spec(
        &dir,
        r#"{"type":"ifs","dim":1,"maps":[{"ratio":0.5,"offset":[0.0]},{"ratio":0.5,"offset":[0.5]}],"weights":[0.7,0.7]}"#,
    );
    let out_dir = dir.join("out");
    let out = run(&out_dir, &["build-measure", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 2);
    assert!(err["error"]["message"].as_str().unwrap().contains("sum"));
}

#[test]
fn build_measure_normalized_spec_rebuilds() {
    let dir = tmp_dir("build");
    let spec = write_spec(&dir, CANTOR);
    let out = run(&dir, &["build-measure", "--spec", spec.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let rep = report(&dir, "build-measure");
    assert_eq!(value_of(&rep, "ambient_dim", "closed_form"), 1.0);
    let normalized = fs::read_to_string(dir.join("normalized_spec.json")).unwrap();
    let reparsed: scenery_core::spec::MeasureSpec = serde_json::from_str(&normalized).unwrap();
    reparsed.build().unwrap();
}

#[test]
fn salli_box_dimension_tracks_closed_form() {
    let dir = tmp_dir("salli");
    let out = run(&dir, &["salli", "--alpha", "0.25", "--depth", "12"]);
    assert!(out.status.success(), "{out:?}");
    let rep = report(&dir, "salli");
    let exact = value_of(&rep, "dimension", "closed_form");
    let emp = value_of(&rep, "box_dimension", "empirical");
    assert!((exact - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
    assert!((emp - exact).abs() < 0.02, "{emp}");
}

#[test]
fn scan_porosity_emits_per_point_csv() {
    let dir = tmp_dir("poro");
    let spec = write_spec(&dir, CANTOR);
    let out = run(
        &dir,
        &[
            "scan-porosity",
            "--spec",
            spec.to_str().unwrap(),
            "--points",
            "3",
            "--seed",
            "5",
            "--t-total",
            "4.0",
            "--alpha",
            "0.2",
            "--grid-res",
            "8",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let rep = report(&dir, "scan-porosity");
    let mean = value_of(&rep, "mean_scale_fraction", "empirical");
    assert!((0.0..=1.0).contains(&mean));
    let csv = fs::read_to_string(dir.join("porosity_fractions.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("point_id,"));
}
