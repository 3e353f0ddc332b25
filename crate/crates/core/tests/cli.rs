//! End-to-end runs of the `indefsl` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect()
}

fn indefsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_indefsl")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn essential_reports_the_gap() {
    let f = fixture("gap_family.json");
    let v = json(&indefsl(&["essential", f.to_str().unwrap()]));
    assert_eq!(v["gaps"], serde_json::json!([[-1.0, 1.0]]));
}

#[test]
fn bands_of_a_periodic_tail() {
    let f = fixture("periodic_cosine.json");
    let v = json(&indefsl(&["bands", f.to_str().unwrap()]));
    assert_eq!(v["plus"]["status"], "ok");
    assert_eq!(v["minus"]["status"], "ok");
    let f = fixture("gap_family.json");
    let v = json(&indefsl(&["bands", f.to_str().unwrap()]));
    assert_eq!(v["plus"]["status"], "skipped");
}

#[test]
fn eig_csv_has_header_and_rows() {
    let f = fixture("sech2.json");
    let out = indefsl(&["eig", f.to_str().unwrap(), "--format", "csv", "--trunc", "4,6,8", "--density", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,re,im,residual"));
    // Interior nodes: 31, 47 and 63 at X = 4, 6, 8.
    assert_eq!(lines.count(), 31 + 47 + 63);
}

#[test]
fn budget_runs_only_its_sections() {
    let f = fixture("gap_family.json");
    let v = json(&indefsl(&["budget", f.to_str().unwrap(), "--trunc", "10,20,30"]));
    assert_eq!(v["budget"]["status"], "ok");
    assert_eq!(v["counts"]["status"], "ok");
    assert_eq!(v["spectrum"]["status"], "skipped");
    assert_eq!(v["kneser"]["status"], "skipped");
}

#[test]
fn output_file_and_determinism() {
    let f = fixture("cx2_0.json");
    let dir = std::env::temp_dir();
    let a = dir.join(format!("indefsl-cli-{}-a.json", std::process::id()));
    let b = dir.join(format!("indefsl-cli-{}-b.json", std::process::id()));
    for p in [&a, &b] {
        let out = indefsl(&["kneser", f.to_str().unwrap(), "--out", p.to_str().unwrap()]);
        assert!(out.status.success() && out.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let _ = (std::fs::remove_file(&a), std::fs::remove_file(&b));
    assert_eq!(x, y);
    let v: Value = serde_json::from_slice(&x).unwrap();
    assert_eq!(v["kneser"]["data"]["verdicts"][1]["verdict"], "no_accumulate");
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = std::env::temp_dir();
    let p = dir.join(format!("indefsl-cli-{}-bad.json", std::process::id()));
    std::fs::write(&p, r#"{"schema_version":1,"name":"x","coefficients":{"r":"sgn(x)","p":"1","q":"1"},"numerics":{"levels":[40,20,80]}}"#).unwrap();
    let out = indefsl(&["analyze", p.to_str().unwrap()]);
    let _ = std::fs::remove_file(&p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerics.levels"));

    let f = fixture("coulomb.json");
    let out = indefsl(&["compare", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = indefsl(&["essential", f.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}
