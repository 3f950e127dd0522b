use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};

fn hklat(args: &[&str], input: Option<&Value>) -> (i32, Value) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hklat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("hklat runs");
    let body = input.map(|v| v.to_string()).unwrap_or_default();
    child.stdin.take().unwrap().write_all(body.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

fn identity(n: usize) -> Value {
    let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    json!(rows)
}

#[test]
fn normal_form_round_trips_through_verify() {
    let isometry = json!({"lattice": "K3n:2", "matrix": identity(23)});
    let (code, nf) = hklat(&["factor", "decompose"], Some(&isometry));
    assert_eq!(code, 0);
    let (code, report) = hklat(&["factor", "verify"], Some(&json!({"isometry": isometry, "normal_form": nf})));
    assert_eq!(code, 0);
    assert_eq!(report["ok"], true);
}

#[test]
fn mukai_vectors_feed_star() {
    let sheaf = json!({"r": 2, "c1": vec![0; 22], "ch2": -1});
    let (code, v) = hklat(&["mukai", "v"], Some(&sheaf));
    assert_eq!(code, 0);
    assert_eq!(v["s"], 1);
    let (code, _) = hklat(&["mukai", "star"], Some(&json!({"a": v, "b": v})));
    assert_eq!(code, 0);
}

#[test]
fn exit_codes() {
    let (code, err) = hklat(&["factor", "decompose"], Some(&json!({"lattice": "U", "matrix": [[0, 1], [1, 0]]})));
    assert_eq!(code, 2);
    assert_eq!(err["error"]["kind"], "contract");

    let (code, err) = hklat(&["mukai", "v"], Some(&json!({"r": 1.5, "c1": vec![0; 22], "ch2": 0})));
    assert_eq!(code, 3);
    assert_eq!(err["error"]["kind"], "input");

    let (code, _) = hklat(&["lattice", "frobnicate"], None);
    assert_eq!(code, 3);
}

#[test]
fn verify_criterion_is_deterministic() {
    let a = hklat(&["verify", "criterion", "--id", "3", "--seed", "7"], None);
    let b = hklat(&["verify", "criterion", "--id", "3", "--seed", "7"], None);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
}
