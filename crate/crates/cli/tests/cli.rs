use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

const GL3: &str = r#"{"hbar":[0.3,0.0],"u":[[0,0],[1,0.3],[0.4,1.1]],"rep":{"type":"defining","nu":3}}"#;
const CLASSICAL2: &str =
    r#"{"u":[[0,0],[1,0]],"classical":{"mult":[1,1],"A":[[[0,0],[0.2,0]],[[0.3,0],[0,0]]]}}"#;
const COLLINEAR: &str = r#"{"hbar":[0.3,0.0],"u":[[0,0],[1,0],[2,0]],"rep":{"type":"defining","nu":3}}"#;

fn problem(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("{name}.json"));
    std::fs::write(&path, text).unwrap();
    path
}

fn run(config: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes-lab")).arg("--config").arg(config).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn rtt_on_the_defining_representation() {
    let out = run(&problem("rtt", GL3), &["verify", "rtt"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["result"]["pass"], Value::Bool(true));
    assert_eq!(r["conventions"]["complex"], "[re, im]");
}

#[test]
fn malformed_input_reports_a_pointer() {
    let bad = problem("bad_type", r#"{"hbar":[0.3,0.0],"u":[[0,0],[1,"x"]],"rep":{"type":"defining","nu":2}}"#);
    let out = run(&bad, &["verify", "rtt"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["pointer"], "/u/1/1");

    let unknown = problem("bad_key", r#"{"hbar":[0.3,0.0],"u":[[0,0],[1,0]],"rep":{"type":"defining","nu":2},"x":1}"#);
    let out = run(&unknown, &["verify", "rtt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(report(&out)["error"]["message"].as_str().unwrap().contains('x'));

    let wrong_nu = problem("bad_nu", r#"{"hbar":[0.3,0.0],"u":[[0,0],[1,0]],"rep":{"type":"defining","nu":3}}"#);
    let out = run(&wrong_nu, &["verify", "rtt"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["pointer"], "/rep/nu");
}

#[test]
fn bad_flags_are_validation_errors() {
    let p = problem("flags", CLASSICAL2);
    let out = run(&p, &["stokes", "--pair", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["error"]["pointer"], "--pair");
    let out = run(&p, &["verify", "rtt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn both_methods_agree_on_a_stokes_entry() {
    let out = run(&problem("both", CLASSICAL2), &["stokes", "--pair", "1,2", "--method", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["difference"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["pair"], serde_json::json!([1, 2]));
}

#[test]
fn repeated_runs_are_identical() {
    let p = problem("repeat", GL3);
    let a = run(&p, &["verify", "rtt"]);
    let b = run(&p, &["verify", "rtt"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&p, &["assemble"]);
    let b = run(&p, &["assemble"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn blocked_segment_is_a_geometry_error() {
    let out = run(&problem("collinear", COLLINEAR), &["stokes", "--pair", "1,3", "--method", "product"]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "geometry");
    assert_eq!(r["error"]["message"], "u_2 lies on the segment [u_1, u_3]");
}

#[test]
fn thread_count_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_stokes-lab"))
        .env("STOKES_LAB_THREADS", "0")
        .arg("--config")
        .arg(problem("threads", GL3))
        .args(["verify", "rtt"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn assembled_matrices_are_reported_in_the_im_ordering() {
    let out = run(&problem("assemble", CLASSICAL2), &["assemble", "--d", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["conventions"]["d"], 0.5);
    assert_eq!(r["conventions"]["ordering"].as_array().unwrap().len(), 2);
    let rays = r["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 2);
    assert_eq!(rays[0]["pairs"], serde_json::json!([[1, 2]]));
    assert_eq!(rays[1]["pairs"], serde_json::json!([[2, 1]]));
}
