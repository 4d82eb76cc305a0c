use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cbcast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbcast"))
        .args(args)
        .env_remove("CBCAST_SEED")
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cbcast-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn analyze_linear_reports_exact_capacity() {
    let out = cbcast(&["--json", "analyze", "ternary7"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["cost_symbols"], 4);
    assert_eq!(v["capacity"], "3/2");
    assert_eq!(v["tight"], true);
}

#[test]
fn emitted_scheme_verifies() {
    let path = scratch("butterfly_scheme.json");
    let out = cbcast(&["solve", "butterfly", "--emit", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = cbcast(&["verify", "butterfly", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    // the same scheme does not serve a different instance
    let out = cbcast(&["verify", "zero_sum", path.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn bad_input_exits_with_code_2() {
    assert_eq!(
        cbcast(&["analyze", "no_such_instance"]).status.code(),
        Some(2)
    );
    let path = scratch("broken.json");
    std::fs::write(
        &path,
        r#"{"type": "matching", "m": 2, "m1": 1, "m2": 1, "pi": [[[1, "x"]]]}"#,
    )
    .unwrap();
    let out = cbcast(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/pi/0/0/1"));
}

#[test]
fn classify_and_bounds_on_bundled_matchings() {
    assert_eq!(
        json_of(&cbcast(&["--json", "classify", "cb1"]))["class"],
        "maximal"
    );
    assert_eq!(
        json_of(&cbcast(&["--json", "classify", "cb2"]))["class"],
        "minimal"
    );
    let v = json_of(&cbcast(&["--json", "bounds", "matching_4x3"]));
    assert_eq!(v["bounds"]["gap_bits"], 1.0);
    assert!(v["note"].as_str().unwrap().contains("open"));
}

#[test]
fn oracle_on_and_or() {
    let v = json_of(&cbcast(&["--json", "oracle", "andor"]));
    let h = v["h_bits"].as_f64().unwrap();
    assert!((h - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-9);
    assert_eq!(v["optimal"], true);
}

#[test]
fn simulate_is_reproducible_from_the_seed_variable() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_cbcast"))
            .args([
                "--json", "simulate", "--n1", "4", "--n2", "3", "-L", "100", "--trials", "200",
            ])
            .env("CBCAST_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b) = (run("9"), run("9"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json_of(&a)["seed"], 9);
    let out = cbcast(&["simulate", "--n1", "3", "--n2", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_reports_the_failing_row() {
    let out = cbcast(&["--json", "selftest"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    let failing: Vec<&Value> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["expected"], "capacity 7/4");
}
