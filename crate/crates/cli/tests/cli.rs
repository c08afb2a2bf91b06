// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gshe_camo::camo::{Key, LockedCircuit};

fn bench(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gshe-camo")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn camouflage(dir: &Path) {
    let out = run(&[
        "camouflage",
        bench("c432g.bench").to_str().unwrap(),
        "--set",
        "lut6",
        "--fraction",
        "0.05",
        "--seed",
        "3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["locked.json", "selection.json", "reference.bench", "key.secret.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
}

#[test]
fn attack_works_without_the_secret_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    camouflage(dir.path());
    let secret = dir.path().join("key.secret.json");
    let correct: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&secret).unwrap()).unwrap();
    std::fs::remove_file(&secret).unwrap();

    let locked = dir.path().join("locked.json");
    let reference = dir.path().join("reference.bench");
    let out = run(&[
        "attack",
        locked.to_str().unwrap(),
        "--oracle",
        reference.to_str().unwrap(),
        "--timeout-s",
        "120",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["status"], "key-recovered");
    let key = report["key"].as_str().unwrap().to_string();
    assert_eq!(Key::from_hex(&key).unwrap().len(), Key::from_hex(correct["key"].as_str().unwrap()).unwrap().len());

    let ok = run(&["verify", locked.to_str().unwrap(), "--key", &key, "--reference", reference.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["verified"], "equivalent");
}

#[test]
fn verify_rejects_a_wrong_key() {
    let dir = tempfile::tempdir().unwrap();
    camouflage(dir.path());
    let correct: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("key.secret.json")).unwrap()).unwrap();
    let mut key = Key::from_hex(correct["key"].as_str().unwrap()).unwrap();
    let locked_net: LockedCircuit =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("locked.json")).unwrap()).unwrap();
    let cell = &locked_net.cells()[0];
    let code = key.code(cell.key_offset, cell.key_width);
    key.set_code(cell.key_offset, cell.key_width, (code + 1) % cell.members.len());
    let wrong = key.to_hex();

    let locked = dir.path().join("locked.json");
    let reference = dir.path().join("reference.bench");
    let out = run(&["verify", locked.to_str().unwrap(), "--key", &wrong, "--reference", reference.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["verified"], "inequivalent");
}

#[test]
fn device_metrics_reports_power() {
    let out = run(&["device-metrics", "--samples", "1000"]);
    assert!(out.status.success());
    let m = json(&out);
    let p = m["power_uW"].as_f64().unwrap();
    assert!((p - 0.2095).abs() < 1e-3, "{p}");
    assert!((m["g_p_uS"].as_f64().unwrap() - 420.0).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sta", "/nonexistent.bench"]).status.code(), Some(2));
}

#[test]
fn campaign_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let cfg_json = serde_json::json!({
        "benchmarks": [bench("c432g.bench")],
        "sets": ["invbuf2", "gshe16"],
        "fractions": [0.05],
        "seeds": [0, 1],
        "out_dir": dir.path().join("run"),
    });
    std::fs::write(&cfg, cfg_json.to_string()).unwrap();
    let out = run(&["campaign", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.matches("key-recovered").count(), 4);
}
