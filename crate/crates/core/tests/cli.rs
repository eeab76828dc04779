use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nuclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nuclab")).current_dir(dir).args(args).output().expect("spawn nuclab")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn construct_prints_exact_energy_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = nuclab(
        dir.path(),
        &[
            "construct", "--family", "lens21", "--lambda", "1/2", "--L", "2", "--H", "4",
            "--scene", "s.json", "--field", "f.nucf", "--resolution", "32", "--svg", "s.svg",
        ],
    );
    let e = json(&out);
    assert!((e["elastic"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(e["V"].as_f64().unwrap(), 4.0);
    for f in ["s.json", "f.nucf", "f.json", "s.svg"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let svg = std::fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("#1f77b4") && svg.contains("<line"));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(sidecar["well_set"], "two_well");

    // The scene file feeds back into `energy`.
    let again = json(&nuclab(dir.path(), &["energy", "s.json"]));
    assert_eq!(again["elastic"], e["elastic"]);
    let spectral = json(&nuclab(dir.path(), &["energy", "f.nucf"]));
    assert_eq!(spectral["resolution"], 32);
    assert!(spectral["elastic"].as_f64().unwrap() <= 0.25 * 1.1);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = nuclab(dir.path(), &["construct", "--family", "lens21", "--L", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--H"));
    assert_eq!(nuclab(dir.path(), &["predict", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(nuclab(dir.path(), &["sweep", "--family", "lens21"]).status.code(), Some(2));
    assert_eq!(nuclab(dir.path(), &["sweep", "--family", "lens21", "--decades", "3:2"]).status.code(), Some(2));
    assert_eq!(nuclab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(nuclab(dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn construction_errors_name_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let out = nuclab(dir.path(), &["construct", "--family", "ball", "--n", "3", "--V", "1", "--svg", "b.svg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2D only"));
    assert!(!dir.path().join("b.svg").exists());
    let out = nuclab(dir.path(), &["construct", "--family", "lens21", "--lambda", "3/2", "--L", "2", "--H", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("lambda"));
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, csv: &str| {
        nuclab(
            dir.path(),
            &["sweep", "--family", "lens21", "--decades", "2:6", "--fit", "power", "--csv", csv, "--jobs", jobs],
        )
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    assert_eq!(a.stdout, b.stdout);
    let csv_a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let fit = json(&a)["fits"]["power"]["slope"].as_f64().unwrap();
    assert!((fit - 0.6).abs() < 0.03, "slope {fit}");

    let refit = json(&nuclab(dir.path(), &["fit", "a.csv", "--model", "power"]));
    assert!((refit["power"]["slope"].as_f64().unwrap() - fit).abs() < 1e-12);
}

#[test]
fn sweep_records_infeasible_volumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = nuclab(dir.path(), &["sweep", "--family", "lens21", "--grid", "0.5,1e2,1e3,1e4,1e5"]);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), r#"{"command": "predict", "n": 3, "m": 3}"#).unwrap();
    let p = json(&nuclab(dir.path(), &["--config", "run.json"]));
    assert_eq!(p["large_volume"], "6/7");
    let p = json(&nuclab(dir.path(), &["predict", "--n", "2", "--m", "1", "--config", "run.json"]));
    assert_eq!(p["large_volume"], "6/7");
    std::fs::write(dir.path().join("bad.json"), r#"{"command": "wells"}"#).unwrap();
    assert_eq!(nuclab(dir.path(), &["predict", "--config", "bad.json"]).status.code(), Some(2));
}

#[test]
fn predict_quotes() {
    let dir = tempfile::tempdir().unwrap();
    let p = json(&nuclab(dir.path(), &["predict", "--family", "lens_branch_4w"]));
    assert_eq!((p["small_volume"].as_str(), p["large_volume"].as_str()), (Some("1/2"), Some("5/7")));
    assert_eq!(p["epsilon_exponent"], "4/7");
    let p = json(&nuclab(dir.path(), &["predict", "--n", "3", "--m", "2"]));
    assert_eq!(p["large_volume"], "9/11");
}

#[test]
fn diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    json(&nuclab(
        dir.path(),
        &["construct", "--family", "lens_branch_4w", "--L", "20", "--H", "40", "--r", "2", "--field", "lb.nucf", "--resolution", "64"],
    ));
    let rows = json(&nuclab(dir.path(), &["diagnose", "cones", "--mu", "0.3", "--mu2", "0.5", "lb.nucf"]));
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!(rows[0]["residual"].as_f64().unwrap() >= 0.0 && rows[0]["rhs"].as_f64().unwrap() > 0.0);
    let rows = json(&nuclab(dir.path(), &["diagnose", "lowfreq", "lb.nucf"]));
    assert!(rows.as_array().unwrap().iter().all(|r| r["holds"] == true));
    let rows = json(&nuclab(dir.path(), &["diagnose", "commutator", "lb.nucf"]));
    assert_eq!(rows[0]["relation"], "four_well_2d");
    assert!(rows[0]["report"]["ratio"].as_f64().unwrap() <= 100.0);

    // A two-well field has no relation to transfer.
    json(&nuclab(dir.path(), &["construct", "--family", "lens21", "--L", "2", "--H", "4", "--field", "l.nucf", "--resolution", "32"]));
    let out = nuclab(dir.path(), &["diagnose", "commutator", "l.nucf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("precondition"));
    let out = nuclab(dir.path(), &["diagnose", "commutator", "l.nucf", "--from", "1", "--to", "0", "--poly", "0,-3/2,0,1/2"]);
    assert!(stderr(&out).contains("relation does not hold"));

    std::fs::write(dir.path().join("junk.nucf"), b"nope").unwrap();
    let out = nuclab(dir.path(), &["diagnose", "lowfreq", "junk.nucf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("format"));
}

#[test]
fn lowfreq_of_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let field = nuclab::geometry::GridField::zeros(2, 16, 4.0);
    nuclab::geometry::write_field(&field, &dir.path().join("z.nucf")).unwrap();
    let rows = json(&nuclab(dir.path(), &["diagnose", "lowfreq", "z.nucf"]));
    assert_eq!((rows[0]["mass"].as_f64(), rows[0]["bound"].as_f64()), (Some(0.0), Some(0.0)));
}

#[test]
fn wells_report() {
    let dir = tempfile::tempdir().unwrap();
    let w = json(&nuclab(dir.path(), &["wells", "--set", "four_well_2d"]));
    assert_eq!(w["lamination_order_of_zero"], 2);
    assert!(w["relations"].as_array().unwrap().iter().all(|r| r["passed"] == true));
    let w = json(&nuclab(dir.path(), &["wells", "--set", "tartar"]));
    assert_eq!(w["lamination_order_of_zero"], "not reached(10)");
}
