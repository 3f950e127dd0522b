//! Acceptance run: criteria 1-10 in-process, criterion 11 through the binary.
//! Prints one PASS/FAIL line per criterion.

use std::process::Command;

use hklat::suite::{self, CRITERIA};

const SEED: u64 = 42;

fn line(id: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("{status} criterion {id}: {name} ({detail})");
}

fn verify_all() -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hklat"))
        .args(["verify", "all", "--seed", &SEED.to_string()])
        .output()
        .expect("hklat runs");
    (out.status.code(), out.stdout)
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut reports = Vec::new();
    for &(id, name) in &CRITERIA {
        match suite::run(id, SEED) {
            Ok(r) => {
                line(id, name, r.pass, &format!("{} checks; {}", r.checked, r.detail));
                if !r.pass {
                    failed.push(id);
                }
                reports.push(r);
            }
            Err(e) => {
                line(id, name, false, &e.to_string());
                failed.push(id);
            }
        }
    }

    let (code1, out1) = verify_all();
    let (code2, out2) = verify_all();
    let identical = out1 == out2;
    let report: serde_json::Value = serde_json::from_slice(&out1).unwrap_or(serde_json::Value::Null);
    // the binary must reproduce the in-process results
    let matches_lib = report["criteria"] == serde_json::to_value(&reports).expect("serializable");
    let pass = identical && code1 == Some(0) && code2 == Some(0) && report["pass"] == true && matches_lib;
    line(
        11,
        "CLI determinism",
        pass,
        &format!(
            "exit codes {code1:?}/{code2:?}, {} bytes, identical: {identical}, matches in-process run: {matches_lib}",
            out1.len()
        ),
    );
    if !pass {
        failed.push(11);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
