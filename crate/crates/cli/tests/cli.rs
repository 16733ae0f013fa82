use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cluster-reduce")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cluster-reduce-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn reduce_binary_prints_json_report() {
    let o = run(&["reduce-binary", "--json", "7*x^4 + 95*x^3*y + 483*x^2*y^2 + 1090*x*y^3 + 922*y^4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "cluster-reduce/1");
    assert_eq!(v["kind"], "binary-form");
    assert!(v["reduced"]["forms"][0]["text"].is_string());
}

#[test]
fn reduce_ternary_text_and_report_file() {
    let report = scratch("ternary.json");
    let o = run(&["reduce-ternary", "x^3 + 2*y^3 - 3*z^3 + x*y*z", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["kind"], "ternary-form");
}

#[test]
fn reduce_pencil_reads_forms_from_files() {
    let q1 = scratch("q1.txt");
    let q2 = scratch("q2.txt");
    std::fs::write(&q1, "x^2 + 2*y^2 - 3*z^2 + x*y").unwrap();
    std::fs::write(&q2, "x^2 - y^2 + 5*z^2 - y*z + 2*x*z").unwrap();
    let o = run(&["reduce-pencil", q1.to_str().unwrap(), q2.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["kind"], "quadric-pencil");
    assert_eq!(v["reduced"]["forms"].as_array().unwrap().len(), 2);
}

#[test]
fn classify_and_covariant_of_a_cluster_file() {
    let path = scratch("cluster.json");
    let o = run(&["reduce-binary", "--json", "x^3 - 2*x*y^2 + y^3"]);
    let cluster = stdout_json(&o)["cluster"].clone();
    std::fs::write(&path, cluster.to_string()).unwrap();

    let o = run(&["classify", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["stability"]["is_stable"], true);

    let o = run(&["covariant", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["attained"], true);

    let o = run(&["reduce-cluster", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unstable_input_exits_with_stability_code() {
    let o = run(&["reduce-ternary", "y^2*z - x^3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stable: false"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let o = run(&["reduce-binary", "x^^3 + y"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = run(&["reduce-binary", "x^2 + y^2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["reduce-binary", "x^3 + y^3", "--json", "--text"]);
    assert_ne!(o.status.code(), Some(0));
}
