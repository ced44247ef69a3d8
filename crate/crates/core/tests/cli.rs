use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn voxpht(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_voxpht")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn phantom_then_fit_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img");
    let out = voxpht(&["phantom", "--phantom", "disk", "--out", img.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pgm = std::fs::read_dir(&img)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "pgm"))
        .unwrap();

    let fit = dir.path().join("fit");
    let out = voxpht(&[
        "fit", "--input", pgm.to_str().unwrap(), "--n", "8", "--levels", "1", "--T", "127.5", "--seed", "9",
        "--out", fit.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("level,active"));
    assert_eq!(stdout.lines().count(), 3);
    let m = manifest(&fit);
    assert_eq!(m["command"], "fit");
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["config"]["fit"]["threshold"], 127.5);
    for f in m["outputs"].as_array().unwrap() {
        assert!(Path::new(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn failures_exit_nonzero_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = voxpht(&["fit", "--input", "/nonexistent/x.pgm", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("image_io"));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("image_io"));
}

#[test]
fn bad_arguments_are_rejected() {
    let out = voxpht(&["analyze", "--benchmark", "bridge"]);
    assert!(!out.status.success());
    let out = voxpht(&["fit", "--phantom", "disk", "--input", "a.pgm"]);
    assert!(!out.status.success());
}
