use std::path::Path;
use std::process::{Command, Output};

fn channel_econ(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_channel-econ")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_config_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = channel_econ(&[
        "thresholds",
        "--config",
        tmp.path().join("absent.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_config_field_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"market": {"tau": 1000.0, "blocksize": 2}}"#).unwrap();
    let out_dir = tmp.path().join("out");
    let out = channel_econ(&["thresholds", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("blocksize"), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn invalid_grid_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = channel_econ(&["demand", "--phi", "0.01,0.001", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!out_dir.exists());
}

#[test]
fn partial_config_keeps_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"market": {"tau": 576000.0}, "seed": 9}"#).unwrap();
    let out_dir = tmp.path().join("out");
    let out = channel_econ(&["thresholds", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["config"]["market"]["tau"], 576000.0);
    assert_eq!(manifest["config"]["market"]["a"], 1.1);
    assert_eq!(manifest["command"], "thresholds");
}

fn read_dir_sorted(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

#[test]
fn manifest_lists_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = channel_econ(&["reproduce", "demand-powerlaw", "--scaled-down", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    let mut listed: Vec<String> =
        manifest["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string()).collect();
    listed.push("manifest.json".into());
    listed.sort();
    assert_eq!(listed, read_dir_sorted(&out_dir));
    for o in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(out_dir.join(o["file"].as_str().unwrap())).unwrap();
        let lines = bytes.iter().filter(|&&b| b == b'\n').count();
        assert_eq!(lines as u64, o["rows"].as_u64().unwrap() + 1);
        assert!(!bytes.contains(&b'\r'));
    }
}

#[test]
fn bad_thread_cap_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_channel-econ"))
        .args(["thresholds", "--out", tmp.path().join("out").to_str().unwrap()])
        .env("CHANNEL_ECON_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_figure_is_rejected() {
    let out = channel_econ(&["reproduce", "fig-99"]);
    assert_eq!(out.status.code(), Some(2));
}
