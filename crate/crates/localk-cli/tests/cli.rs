use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(specs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    assert!(files.len() >= 3, "bundled corpus is missing");
    files
}

fn localk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localk")).args(args).output().unwrap()
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn corpus_passes_and_is_byte_reproducible() {
    for spec in corpus() {
        let spec = spec.to_str().unwrap();
        for format in ["text", "json"] {
            let first = localk(&["run", "--spec", spec, "--seed", "11", "--format", format]);
            assert_eq!(first.status.code(), Some(0), "{spec}: {}", String::from_utf8_lossy(&first.stdout));
            let second = localk(&["run", "--spec", spec, "--seed", "11", "--format", format]);
            assert_eq!(first.stdout, second.stdout, "{spec} differs between runs");
        }
    }
}

#[test]
fn every_command_is_reproducible() {
    let quotient = specs_dir().join("quotient-clutching.json");
    let cover = specs_dir().join("propagation-cover.json");
    let trivial = specs_dir().join("trivial-q.json");
    let cases = [
        ("verify", &trivial),
        ("boundary", &quotient),
        ("exactness", &quotient),
        ("exactness", &cover),
    ];
    for (cmd, spec) in cases {
        let args = [cmd, "--spec", spec.to_str().unwrap(), "--seed", "5", "--samples", "8"];
        let (a, b) = (localk(&args), localk(&args));
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let spec = specs_dir().join("trivial-q.json");
    let spec = spec.to_str().unwrap();
    let printed = localk(&["verify", "--spec", spec, "--format", "json", "--samples", "5"]);
    let written = localk(&["verify", "--spec", spec, "--format", "json", "--samples", "5", "--report", out.to_str().unwrap()]);
    assert_eq!(written.status.code(), Some(0));
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), printed.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&printed.stdout).unwrap();
    assert_eq!(parsed["passed"], serde_json::Value::Bool(true));
}

#[test]
fn seed_changes_samples_not_outcome() {
    let spec = specs_dir().join("propagation-cover.json");
    let spec = spec.to_str().unwrap();
    let a = localk(&["exactness", "--spec", spec, "--seed", "1", "--samples", "4"]);
    let b = localk(&["exactness", "--spec", spec, "--seed", "2", "--samples", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn zero_samples_is_an_empty_pass() {
    let spec = specs_dir().join("trivial-q.json");
    let out = localk(&["verify", "--spec", spec.to_str().unwrap(), "--samples", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("samples = 0"));
    assert!(text.ends_with("result: PASS\n"));
}

#[test]
fn malformed_rational_is_a_spec_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "bad.json",
        r#"{"algebra": {"kind": "rationals"}, "matrices": {"M": {"over": "algebra", "rows": [["1/0"]]}}}"#,
    );
    let out = localk(&["verify", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spec error"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_spec_and_unreadable_file() {
    assert_eq!(localk(&["verify"]).status.code(), Some(2));
    assert_eq!(localk(&["verify", "--spec", "/nonexistent/spec.json"]).status.code(), Some(2));
    assert_eq!(localk(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_needs_an_algebra() {
    let spec = specs_dir().join("propagation-cover.json");
    assert_eq!(localk(&["verify", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn boundary_without_section_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        &dir,
        "nosection.json",
        r#"{"diagram": {"kind": "quotient", "modulus": ["-1", "0", "1"], "degree_base": 8, "section": false},
            "matrices": {"U": {"over": "overlap", "rows": [[["0", "1"]]]}}}"#,
    );
    let out = localk(&["boundary", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surjective"));
}

#[test]
fn liftable_unit_reports_trivial_class() {
    let spec = specs_dir().join("quotient-liftable.json");
    let out = localk(&["boundary", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("class = trivial"));
    assert!(text.contains("PASS zero certificate"));
}

#[test]
fn clutching_report_shows_defects() {
    let spec = specs_dir().join("quotient-clutching.json");
    let out = localk(&["boundary", "--spec", spec.to_str().unwrap(), "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("s0 = [[[1, 0, -1]]]"));
    assert!(text.contains("s1 = [[[1, 0, -1]]]"));
    assert!(text.contains("PASS closed form matches p"));
    assert!(text.contains("PASS change of lift_b"));
}

#[test]
fn corrupted_conjugator_fails_with_residual() {
    let text = std::fs::read_to_string(specs_dir().join("quotient-exactness.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let one = serde_json::json!(["1"]);
    let zero = serde_json::json!([]);
    let identity: Vec<Vec<serde_json::Value>> =
        (0..4).map(|i| (0..4).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    doc["matrices"]["W"]["rows"] = serde_json::json!(identity);
    doc["matrices"]["W"]["inverse"] = serde_json::json!(identity);
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "corrupt.json", &doc.to_string());
    let out = localk(&["exactness", "--spec", &spec, "--samples", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("FAIL witness trivializes the boundary: entry"), "{report}");
    assert!(report.ends_with("result: FAIL\n"));
}
