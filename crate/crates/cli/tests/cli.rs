//! End-to-end runs of the wpcheck binary: exit codes, report files, and the
//! builtin/user-definition success rules.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn wpcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpcheck"))
        .args(args)
        .output()
        .expect("spawn wpcheck")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const WARPED_DEF: &str = r#"{
  "base": {
    "name": "b",
    "coordinates": ["x", "y", "z"],
    "domain": {"x": [1.0, 2.0], "y": [1.0, 2.0], "z": [1.0, 2.0]},
    "cometric": [["1", "0", "0"], ["1", "0"], ["1"]],
    "bivector": [["z", "-y"], ["x"]]
  },
  "fiber": {
    "name": "f",
    "coordinates": ["u", "v"],
    "domain": {"u": [-1.0, 1.0], "v": [-1.0, 1.0]},
    "cometric": [["1", "0"], ["1"]],
    "bivector": [["1"]]
  },
  "f": "x^2 + y^2 + z^2",
  "mu": "1"
}"#;

// Bivector with a coordinate entry in an unrelated symplectic block; its
// cyclic sum is nonzero at generic points.
const NON_POISSON_DEF: &str = r#"{
  "name": "np",
  "coordinates": ["x1", "x2", "x3", "x4"],
  "domain": {"x1": [0.5, 1.5], "x2": [0.5, 1.5], "x3": [0.5, 1.5], "x4": [0.5, 1.5]},
  "cometric": [["1", "0", "0", "0"], ["1", "0", "0"], ["1", "0"], ["1"]],
  "bivector": [["1", "0", "0"], ["0", "0"], ["x1"]]
}"#;

#[test]
fn examples_list_names_every_builtin() {
    let out = wpcheck(&["examples", "list"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for (name, _) in warped_poisson::builtin_names() {
        assert!(stdout.contains(name), "missing {name} in:\n{stdout}");
    }
}

#[test]
fn builtin_run_writes_report() {
    let report = tmp("symp.json");
    let out = wpcheck(&[
        "examples",
        "run",
        "symplecticR2",
        "--samples",
        "8",
        "--seed",
        "5",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["fixture"], "symplecticR2");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["samples"], 8);
    let suites = v["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 16);
    assert_eq!(suites[0]["id"], "poisson_basics");
    assert_eq!(suites[0]["status"], "pass");
    assert_eq!(suites[4]["status"], "skip");
}

#[test]
fn pinned_failure_exits_zero() {
    // warpedGeneric is built to fail Jacobi; landing on the pinned failure is
    // a successful run.
    let out = wpcheck(&[
        "examples",
        "run",
        "warpedGeneric",
        "--suite",
        "poisson_basics",
        "--suite",
        "warped_tensor",
        "--samples",
        "8",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("expected failure"), "{stdout}");
}

#[test]
fn user_warped_definition_passes() {
    let def = tmp("pair.json");
    fs::write(&def, WARPED_DEF).unwrap();
    let out = wpcheck(&["check", def.to_str().unwrap(), "--samples", "8"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn user_non_poisson_chart_fails() {
    let def = tmp("np.json");
    fs::write(&def, NON_POISSON_DEF).unwrap();
    let out = wpcheck(&["check", def.to_str().unwrap(), "--samples", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = wpcheck(&["examples", "run", "so3star", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn warped_suite_on_chart_fixture_is_an_error() {
    let out = wpcheck(&["examples", "run", "so3star", "--suite", "ricci_cor"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("warped"), "{stderr}");
}

#[test]
fn identical_flags_give_identical_report_bytes() {
    let a = tmp("rep_a.json");
    let b = tmp("rep_b.json");
    for path in [&a, &b] {
        let out = wpcheck(&[
            "examples",
            "run",
            "so3star",
            "--samples",
            "12",
            "--seed",
            "9",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
