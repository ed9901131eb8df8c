use std::io::Write;
use std::process::{Command, Output};

fn hermflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermflow"))
        .args(args)
        .env_remove("HERMFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn hopf_standard_metric_is_flat() {
    let o = hermflow(&["hopf", "--n", "2", "--alpha", "1", "--beta", "0", "--point", "1,0", "--verify"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("all components vanish"));
    assert!(stdout(&o).contains(": ok"));
}

#[test]
fn hopf_bisectional_value() {
    let o = hermflow(&["hopf", "--n", "3", "--alpha", "1", "--beta", "-0.5", "--point", "0,0,1", "--xi", "e1", "--nu", "e1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["bisectional"], 1.0);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["tolerances"]["zero_rel"], 1e-9);
}

#[test]
fn hopf_rejects_bad_input() {
    for args in [
        vec!["hopf", "--n", "3", "--alpha", "1", "--beta", "-2", "--point", "0,0,1"],
        vec!["hopf", "--n", "3", "--alpha", "1", "--beta", "0", "--point", "0,0"],
        vec!["hopf", "--n", "2", "--alpha", "1", "--beta", "0", "--point", "1,2j"],
        vec!["hopf", "--n", "2", "--alpha", "1", "--beta", "0", "--point", "1,0", "--zero-tol", "-1"],
        vec!["hopf", "--n", "2", "--alpha", "1", "--beta", "0", "--point", "1,0", "--format", "csv"],
    ] {
        let o = hermflow(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn flow_gradient_summary() {
    let o = hermflow(&["flow", "--name", "gradient", "--n", "3", "--alpha0", "1", "--beta0", "0", "--format", "text"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("static_ratio=-0.5") && s.contains("verdict preserved"), "{s}");
}

#[test]
fn flow_pluriclosed_csv_keeps_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = hermflow(&["flow", "--name", "pluriclosed", "--n", "2", "--alpha0", "1", "--beta0", "0", "--every", "10", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("F=0"));
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["t", "alpha", "beta", "gamma"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert!(rows.len() > 50);
    for row in rows {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn flow_ustinovskiy_leaves_threshold() {
    let o = hermflow(&["flow", "--name", "ustinovskiy", "--n", "3", "--alpha0", "1", "--beta0", "-0.5", "--t-end", "0.1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["preservation"]["preserved"], false);
    let gammas: Vec<f64> = v["result"]["samples"].as_array().unwrap().iter().map(|s| s["gamma"].as_f64().unwrap()).collect();
    assert!(gammas.windows(2).all(|w| w[1] > w[0]));
    assert!(*gammas.last().unwrap() > -0.5);
    assert!(stderr(&o).contains("verdict not preserved"));
}

#[test]
fn flow_reports_inadmissible_start() {
    let o = hermflow(&["flow", "--coeffs", "1,0,0,0", "--n", "3", "--alpha0", "1", "--beta0", "-1"]);
    assert_eq!(code(&o), 2);
    let o = hermflow(&["flow", "--coeffs", "1,0,0", "--n", "3", "--alpha0", "1", "--beta0", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn cplx_family_and_equations_file() {
    let o = hermflow(&["cplx", "--family", "Siii1", "--params", "sign=-1", "--random", "20", "--slice", "u=v=z=0", "--expect", "holds"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = hermflow(&["cplx", "--family", "Sii", "--params", "x=0.7", "--expect", "holds"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness"));
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"n": 3, "C": [[3, 1, 2, 1, 0]], "D": []}}"#).unwrap();
    let o = hermflow(&["cplx", "--equations", f.path().to_str().unwrap(), "--metric", "r2=2,u=0.1+0.2i", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["result"]["holds"], true);
    let o = hermflow(&["cplx", "--family", "Ni", "--params", "rho=3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn classify_targets() {
    let o = hermflow(&["classify", "--hopf", "--n", "3", "--alpha", "1", "--beta", "-0.4", "--expect", "indefinite"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = hermflow(&["classify", "--family", "Si", "--params", "theta=1.5707963267948966", "--metric", "r2=1.3,t2=0.7", "--expect", "flat"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = hermflow(&["classify", "--family", "Siii1", "--params", "sign=1", "--metric", "r2=2,s2=3", "--expect", "non-positive"]);
    assert_eq!(code(&o), 1);
    let o = hermflow(&["classify", "--family", "Sii", "--params", "x=1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("(Cplx) fails"));
}

#[test]
fn seeded_runs_are_identical() {
    let args = ["classify", "--family", "Ni", "--params", "rho=0,lambda=1,D=0.1", "--metric", "s2=2,u=0.3i", "--format", "json"];
    let a = hermflow(&args);
    let b = hermflow(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_hermflow")).args(args).env("HERMFLOW_SEED", "11").output().unwrap();
    assert_eq!(json(&c)["seed"], 11);
}

#[test]
fn families_listed() {
    let o = hermflow(&["families", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"].as_array().unwrap().len(), 14);
}

#[test]
fn table3_too_few_samples() {
    let o = hermflow(&["table3", "--samples", "5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn table3_corrupted_fixture() {
    let o = hermflow(&["table3", "--families", "Np", "--corrupt"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("expected"), "{}", stderr(&o));
    let text = include_str!("../../hermflow/data/table3.json");
    let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
    let rows = v["rows"].as_array_mut().unwrap();
    let row = rows.iter_mut().find(|r| r["family"] == "Siii1").unwrap();
    row["sign"][0]["verdict"] = "non-positive".into();
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), v.to_string()).unwrap();
    let o = hermflow(&["table3", "--families", "Siii1", "--fixture", f.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 1);
    assert!(!json(&o)["result"]["mismatches"].as_array().unwrap().is_empty());
    std::fs::write(f.path(), "{\"rows\": [").unwrap();
    let o = hermflow(&["table3", "--fixture", f.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn table3_default_run_matches() {
    let o = hermflow(&["table3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("| Np | always |"));
    assert!(!s.contains("MISMATCH"));
}
