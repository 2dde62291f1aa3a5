use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE3: &str = r#"{
  "problem": {"type": "selection", "n": 3, "p": 2},
  "gamma": 1,
  "kind": "discrete",
  "c_lo": [3, 1, 4], "c_hi": [7, 10, 5],
  "d_lo": [3, 1, 4], "d_hi": [7, 10, 5]
}"#;

fn tsro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsro")).args(args).output().expect("binary runs")
}

fn write_instance(dir: &Path, name: &str, kind: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, EXAMPLE3.replace("\"discrete\"", &format!("\"{kind}\""))).unwrap();
    path.to_string_lossy().into_owned()
}

fn solve_json(path: &str, method: &str) -> Value {
    let out = tsro(&["solve", path, "--method", method]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_every_method_on_example3() {
    let dir = tempfile::tempdir().unwrap();
    let disc = write_instance(dir.path(), "d.json", "discrete");
    let cont = write_instance(dir.path(), "c.json", "continuous");
    let var = write_instance(dir.path(), "v.json", "variant");

    let r = solve_json(&disc, "auto");
    assert_eq!(r["value"], "8");
    assert_eq!(r["method"], "discrete");
    assert_eq!(r["witness_x"], serde_json::json!([1]));
    assert_eq!(solve_json(&disc, "equalcost")["value"], "8");
    assert_eq!(solve_json(&disc, "static")["value"], "11");
    assert_eq!(solve_json(&disc, "oracle")["value"], "8");

    let r = solve_json(&cont, "auto");
    assert_eq!(r["value"], "79/8");
    assert_eq!(r["value_float"], 9.875);
    assert_eq!(r["subproblem_provenance"]["kind"], "pair_z");
    assert_eq!(solve_json(&cont, "oracle")["value"], "79/8");

    assert_eq!(solve_json(&var, "auto")["value"], "5");
    assert_eq!(solve_json(&var, "oracle")["value"], "5");
}

#[test]
fn trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cont = write_instance(dir.path(), "c.json", "continuous");
    let trace = dir.path().join("trace.csv");
    let out = tsro(&["solve", &cont, "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("kind,k,k1,k2,item,pi1,value\n"));
    assert!(text.lines().any(|l| l == "pair,,3,1,1,0,79/8"));
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{ \"problem\": ").unwrap();
    let out = tsro(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let cont = write_instance(dir.path(), "c.json", "continuous");
    let out = tsro(&["solve", &cont, "--method", "discrete"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let out = tsro(&["verify", "--n", "5", "--cases", "15", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("discrete: 15 cases, 0 mismatches"));
    assert_eq!(tsro(&["verify", "--n", "12"]).status.code(), Some(2));
}

#[test]
fn gadget_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = tsro(&["gadget", "repsel", "--weights", "1,2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(solve_json(path.to_str().unwrap(), "discrete")["value"], "1");

    let out = tsro(&["gadget", "selection", "--weights", "1,1,2"]);
    let path = dir.path().join("s.json");
    fs::write(&path, &out.stdout).unwrap();
    assert_eq!(solve_json(path.to_str().unwrap(), "discrete")["value"], "6");
}

#[test]
fn export_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let disc = write_instance(dir.path(), "d.json", "discrete");
    let a = tsro(&["export", &disc]);
    let b = tsro(&["export", &disc]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("\\ two-stage model: n=3, gamma=1\nMinimize\n obj: t\n"));
    let s = tsro(&["export", &disc, "--model", "static"]);
    assert!(String::from_utf8(s.stdout).unwrap().contains(" nom: "));
}

#[test]
fn experiment_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = tsro(&[
        "experiment",
        "--n",
        "6",
        "--trials",
        "2",
        "--p",
        "1,3",
        "--gamma",
        "1,2",
        "--seed",
        "5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let gap = fs::read_to_string(out_dir.join("gap_mean.csv")).unwrap();
    assert_eq!(gap.lines().next(), Some("p,1,2"));
    assert!(gap.lines().nth(1).unwrap().starts_with("1,0.00,"));
    assert!(out_dir.join("time_median.csv").exists());
    assert_eq!(fs::read_to_string(out_dir.join("trials.csv")).unwrap().lines().count(), 1 + 3 * 2);

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 5, "trials": 1, "p_values": [2], "gamma_values": [1]}"#).unwrap();
    let out = tsro(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(out_dir.join("gap_mean.csv")).unwrap().lines().count(), 2);
}
