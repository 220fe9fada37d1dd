use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbifold-morse"))
        .args(args)
        .current_dir(dir)
        .env("ORBIFOLD_MORSE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = run(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

#[test]
fn kummer_pipeline_gives_orbifold_polynomial() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "kummer", "-o", "k.json"], d);
    ok(&["analyze", "k.json", "-o", "kd.json"], d);
    assert_eq!(ok(&["poly", "kd.json", "--orbifold"], d).trim(), "1 + 22*t^2 + t^4");
    assert_eq!(ok(&["poly", "kd.json", "--plain"], d).trim(), "1 + 6*t^2 + t^4");
    assert_eq!(ok(&["poly", "kd.json", "--inertia"], d).trim(), "17 + 6*t^2 + t^4");

    fs::write(d.join("m.txt"), ok(&["poly", "kd.json", "--orbifold"], d)).unwrap();
    assert_eq!(ok(&["betti", "m.txt", "--json"], d).trim(), "[1,0,22,0,1]");
}

#[test]
fn analyze_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "kummer", "-o", "k.json"], d);
    let a = ok(&["analyze", "k.json", "--json"], d);
    let out = Command::new(env!("CARGO_BIN_EXE_orbifold-morse"))
        .args(["analyze", "k.json", "--json"])
        .current_dir(d)
        .env("ORBIFOLD_MORSE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a, stdout(&out));
    let data: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(data.as_array().unwrap().len(), 16);
}

#[test]
fn certify_reports_seed_statistics() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "kummer", "-o", "k.json"], d);
    let text = ok(&["analyze", "k.json", "--certify", "--json"], d);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["certificate"]["upstairs"], 16);
    assert_eq!(v["certificate"]["representable"], false);
    assert_eq!(v["critical_points"].as_array().unwrap().len(), 16);
}

#[test]
fn weighted_projective_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "wps", "1", "2", "3", "4", "-o", "w.json"], d);
    let m = ok(&["poly", "w.json", "--plain"], d);
    assert_eq!(m.trim(), "1 + t^2 + t^4 + t^6");
    fs::write(d.join("m.txt"), &m).unwrap();
    assert_eq!(ok(&["betti", "m.txt"], d), "b0 = 1\nb1 = 0\nb2 = 1\nb3 = 0\nb4 = 1\nb5 = 0\nb6 = 1\n");
    let report = ok(&["check", "m.txt", "m.txt", "--strict", "--json"], d);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["consistent"], true);
}

#[test]
fn teardrop_sectors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "teardrop", "-o", "t.json"], d);
    let v: serde_json::Value = serde_json::from_str(&ok(&["inertia", "t.json", "--json"], d)).unwrap();
    // one sector at the smooth point, two at the cone point
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(ok(&["poly", "t.json", "--orbifold"], d).trim(), "1 + t + t^2");
}

#[test]
fn k3_levels_assemble() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "k3", "-o", "k3.json"], d);
    assert_eq!(ok(&["betti", "--levels", "k3.json", "--json"], d).trim(), "[1,0,22,0,1]");
}

#[test]
fn check_accepts_json_maps_and_strict_fails_on_inconsistency() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("m.json"), r#"{"0": 1, "2": 3, "3": 1}"#).unwrap();
    fs::write(d.join("p.txt"), "1 + 2*t^2").unwrap();
    let v: serde_json::Value = serde_json::from_str(&ok(&["check", "m.json", "p.txt", "--json"], d)).unwrap();
    assert_eq!(v["consistent"], true);
    assert_eq!(v["remainder"], serde_json::json!({"2": 1}));

    fs::write(d.join("bad.txt"), "1 + t^2").unwrap();
    fs::write(d.join("one.txt"), "1").unwrap();
    assert_eq!(run(&["check", "bad.txt", "one.txt"], d).status.code(), Some(0));
    assert_eq!(run(&["check", "bad.txt", "one.txt", "--strict"], d).status.code(), Some(1));
}

#[test]
fn betti_rejects_non_lacunary_input() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("p.txt"), "1 + t + t^2").unwrap();
    assert_eq!(run(&["betti", "p.txt"], d).status.code(), Some(1));
}

#[test]
fn degenerate_model_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let model = r#"{"dim": 1, "lattice": false, "generators": [], "function": "x1^3"}"#;
    fs::write(d.join("cubic.json"), model).unwrap();
    let out = run(&["analyze", "cubic.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(run(&["analyze", "missing.json"], d).status.code(), Some(2));
    fs::write(d.join("junk.json"), "{not json").unwrap();
    assert_eq!(run(&["analyze", "junk.json"], d).status.code(), Some(2));
    assert_eq!(run(&["inertia", "junk.json"], d).status.code(), Some(2));
    // not invariant under x -> -x
    let model = r#"{"dim": 1, "lattice": false, "generators": [{"linear": [[-1]]}], "function": "x1^2 + x1"}"#;
    fs::write(d.join("bad.json"), model).unwrap();
    assert_eq!(run(&["analyze", "bad.json"], d).status.code(), Some(2));
    assert_eq!(run(&["example", "nothing"], d).status.code(), Some(2));
}

#[test]
fn flow_reaches_the_minimum_and_census_counts_every_seed() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["example", "kummer", "-o", "k.json"], d);
    let text = ok(&["flow", "k.json", "--x0", "0.4,0.45,0.55,0.6", "--tmax", "50", "--json"], d);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["terminal_status"]["converged"], "(0.5, 0.5, 0.5, 0.5)");

    let text = ok(&["flow", "k.json", "--seeds", "40", "--tmax", "50", "--json"], d);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["total"], 40);
    assert_eq!(v["converged"], 40);

    assert_eq!(run(&["flow", "k.json", "--x0", "0.1,0.2"], d).status.code(), Some(2));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orbifold-morse"))
        .args(["example", "kummer"])
        .current_dir(dir.path())
        .env("ORBIFOLD_MORSE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
