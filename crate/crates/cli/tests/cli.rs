use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmultisum")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn residual(report: &Value) -> f64 {
    report["residual"]["value"].as_str().unwrap().parse().unwrap()
}

#[test]
fn list_all_and_filtered() {
    let out = run(&["list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 35);

    let rows = json(&run(&["list", "--section", "3", "--format", "json"]));
    let rows = rows.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["section"] == 3));
    assert!(rows.iter().any(|r| r["id"] == "C3.4"));

    let out = run(&["list", "--section", "nine"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_exact_instance() {
    let out = run(&["verify", "--id", "D1.1", "--set", "n=2,m=1,q=1/2"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    let r = &doc["reports"][0];
    assert_eq!(r["lhs"]["value"], "4/3");
    assert_eq!(r["rhs"]["value"], "4/3");
    assert_eq!(r["outcome"], "pass");
    assert_eq!(doc["summary"]["pass"], 1);
}

#[test]
fn exit_codes_by_error_class() {
    assert_eq!(code(&run(&["verify", "--id", "D1.1", "--set", "n=2,m=1"])), 2);
    assert_eq!(code(&run(&["verify", "--id", "D9.9", "--set", "n=2"])), 2);
    assert_eq!(code(&run(&["verify", "--id", "D1.1", "--set", "n=2,m=1,q=1/0"])), 2);
    assert_eq!(code(&run(&["verify", "--id", "D1.1"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    // z = q^2 sits on a pole of the right side.
    assert_eq!(code(&run(&["verify", "--id", "GZ1.6", "--set", "n=3,m=2,q=1/2,z=1/4"])), 3);
    assert_eq!(code(&run(&["verify", "--id", "K1.2", "--set", "q=3/2"])), 3);
    assert_eq!(code(&run(&["sweep", "--trials", "0"])), 2);
    assert_eq!(code(&run(&["sweep", "--id", "D1.1", "--bounds", "n=40"])), 2);
}

#[test]
fn residual_breach_is_a_check_failure() {
    // Nine terms of the Lambert series cannot reach the default tolerance.
    let out = run(&["verify", "--id", "K1.2", "--set", "q=1/2", "--K", "9"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["reports"][0]["outcome"], "fail");
}

#[test]
fn strict_printed_marks_documented_typos() {
    let set = "n=3,r=1,q=1/2,z=1/3";
    let out = run(&["verify", "--id", "E4.7", "--set", set, "--strict-printed"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["reports"][0]["outcome"], "expected-fail");
    assert!(!doc["errata"].as_array().unwrap().is_empty());
    assert_eq!(code(&run(&["verify", "--id", "E4.7", "--set", set])), 0);
}

#[test]
fn reduction_on_explicit_target() {
    let out = run(&["verify", "--id", "P1.3", "--set", "n=4,m=2,q=2/7", "--reduction", "TA1.8->P1.3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["reports"][0]["check"], "reduction TA1.8->P1.3");
}

#[test]
fn sweep_single_id_passes() {
    let out = run(&["sweep", "--id", "TA1.8", "--trials", "50", "--bounds", "n=6,k=3"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["summary"]["total"], 50);
    assert_eq!(doc["summary"]["pass"], 50);
    assert_eq!(doc["config"]["bounds"], "n=6,k=3,m=3,l=3,retries=1000");
}

#[test]
fn sweep_all_is_thread_independent() {
    let args = |threads: &'static str| ["sweep", "--id", "all", "--trials", "3", "--seed", "7", "--threads", threads];
    let one = run(&args("1"));
    let many = run(&args("4"));
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, many.stdout);
    let doc = json(&one);
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3 * (35 + 6));
    assert!(reports.iter().any(|r| r["check"] == "reduction PC1.12->GZ1.6"));
}

#[test]
fn json_report_round_trips() {
    let out = run(&["sweep", "--id", "PB1.11", "--trials", "4", "--seed", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let doc = qmultisum::ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.to_json(), text);
}

#[test]
fn csv_and_out_file() {
    let dir = std::env::temp_dir().join(format!("qmultisum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let out = run(&["sweep", "--id", "C3.4", "--trials", "5", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("id,check,instance"));
    assert!(lines[1..].iter().all(|l| l.starts_with("C3.4,verify,")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn probe_non_integer_order() {
    let out = run(&["probe", "--id", "N2.16", "--a", "1/2", "--q", "2/5", "--x", "1/3"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["reports"][0];
    assert_eq!(r["outcome"], "exploratory");
    assert!(residual(r) <= 1e-25);
}

#[test]
fn probe_integer_order_matches_exact() {
    let out = run(&["probe", "--id", "PC1.12", "--a", "3"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["reports"][0];
    assert!(residual(r) <= 1e-30);
    let note = r["note"].as_str().unwrap();
    let dev: f64 = note.rsplit("= ").next().unwrap().parse().unwrap();
    assert!(dev <= 1e-30, "{note}");
}

#[test]
fn probe_domain_and_usage_errors() {
    assert_eq!(code(&run(&["probe", "--id", "PC1.12", "--a", "2", "--q", "3/2"])), 3);
    assert_eq!(code(&run(&["probe", "--id", "N2.16", "--a", "1/2", "--q", "-1"])), 3);
    assert_eq!(code(&run(&["probe", "--id", "D1.1", "--a", "1/2"])), 2);
    assert_eq!(code(&run(&["probe", "--id", "N2.16", "--a", "1/2", "--z", "1/3"])), 2);
}

#[test]
fn strict_printed_sweep_has_no_regressions() {
    let out = run(&["sweep", "--id", "all", "--trials", "2", "--seed", "3", "--strict-printed"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["summary"]["fail"], 0);
    assert!(doc["summary"]["expected_fail"].as_u64().unwrap() > 0);
}
