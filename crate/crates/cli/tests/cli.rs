use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cirlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cirlab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn verdict(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn verify_etm_writes_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = cirlab(dir.path(), &["verify-etm", "--program", "zoo/factorial.incremental", "--n-max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let v = verdict(&out);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["range"], serde_json::json!([1, 12]));
    let csv = std::fs::read_to_string(dir.path().join("out/factorial.incremental.etm.csv")).unwrap();
    assert!(csv.starts_with("n,i,k_n_i,t_i,total\n"));
    assert_eq!(csv.lines().count(), 1 + (1..=12).sum::<usize>());
}

#[test]
fn measured_palindrome_series_fits_near_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = cirlab(dir.path(), &["measure", "--program", "tm/palindrome1", "--n-min", "16", "--n-max", "512", "--n-step", "16"]);
    assert_eq!(m.status.code(), Some(0));
    assert!(dir.path().join("out/palindrome1.svg").is_file());
    let f = cirlab(dir.path(), &["fit", "--series", "out/palindrome1.csv"]);
    assert_eq!(f.status.code(), Some(0));
    let exponent = verdict(&f)["details"][0]["exponent"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&exponent), "{exponent}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["measure"][..],
        &["measure", "--program", "zoo/nope"][..],
        &["measure", "--program", "zoo/pow3.direct", "--n-min", "9", "--n-max", "3"][..],
        &["verify-etm", "--program", "zoo/pow3.direct", "--budget", "0"][..],
    ] {
        assert_eq!(cirlab(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_verification_exits_one_with_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = cirlab(dir.path(), &["verify-approx", "--witness", "approx/factorial.doubled-tight", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = verdict(&out);
    assert_eq!(v["verdict"], "fail");
    assert!(v["details"][0].as_str().unwrap().starts_with("approx:"));

    let out = cirlab(dir.path(), &["appendixB", "--form", "log"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = "name = mine\nfunction = factorial\nm = zoo/factorial2.incremental\np = helper/approx.halve\nbound = 3*nlogn + 4\nrho = record-i\n";
    std::fs::write(dir.path().join("w.txt"), manifest).unwrap();
    let out = cirlab(dir.path(), &["verify-approx", "--witness", "w.txt", "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = verdict(&out);
    assert_eq!(v["target"], "mine");
    assert!(v["details"][0]["efficiency_constant"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.cfg"), "program = zoo/pow3.incremental\nn-max = 40\nout = results\n").unwrap();
    let out = cirlab(dir.path(), &["verify-etm", "--config", "exp.cfg", "--n-max", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(verdict(&out)["range"], serde_json::json!([1, 6]));
    assert!(dir.path().join("results/pow3.incremental.etm.csv").is_file());
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let args = ["measure", "--program", "zoo/eca30.direct", "--n-min", "8", "--n-max", "64", "--n-step", "8", "--jobs", "3"];
        assert_eq!(cirlab(d.path(), &args).status.code(), Some(0));
        assert_eq!(cirlab(d.path(), &["fit", "--series", "out/eca30.direct.csv"]).status.code(), Some(0));
        assert_eq!(cirlab(d.path(), &["verify-ca", "--witness", "ca/factorial~factorial2", "--n-max", "10"]).status.code(), Some(0));
    }
    for f in ["eca30.direct.csv", "eca30.direct.fit.json", "factorial_factorial2.ca.json", "factorial_factorial2.ledger.json"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn falsify_reports_the_parity_split() {
    let dir = tempfile::tempdir().unwrap();
    let out = cirlab(dir.path(), &["falsify", "--program", "zoo/interleave_factorial.shortcut"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(verdict(&out)["verdict"], "strong form falsified, CIR-consistent pattern on odd indices");
}

#[test]
fn report_exports_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let out = cirlab(dir.path(), &["report", "--n-max", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let ledger: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/ca_ledger.json")).unwrap()).unwrap();
    let classes = ledger["classes"].as_array().unwrap();
    let fact = classes.iter().find(|c| c["members"].as_array().unwrap().iter().any(|m| m == "factorial")).unwrap();
    assert_eq!(fact["members"], serde_json::json!(["factorial", "factorial2", "factorial4"]));
}
