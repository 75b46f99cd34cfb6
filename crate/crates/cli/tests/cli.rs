use std::path::PathBuf;
use std::process::{Command, Output};

use multerg::characters::{characters_mod, DirichletCharacter};
use multerg::pretend::FgMultFunction;
use multerg::systems::MultSystem;
use serde_json::Value;

fn inputs(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs").join(name);
    root.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multerg")).args(args).output().expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn primes_to_ten() {
    let recs = records(&run(&["primes", "--limit", "10"]));
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["payload"]["primes"], serde_json::json!([2, 3, 5, 7]));
    assert_eq!(recs[0]["command"], "primes");
}

#[test]
fn mean_direct_and_halasz_agree() {
    let n = 1_000_000u64;
    let recs = records(&run(&["mean", "--fn", &inputs("one_minus_at_2.json"), "--N", "1e6", "--method", "both"]));
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["payload"]["method"], "direct");
    assert_eq!(recs[0]["N"], n);
    assert_eq!(recs[1]["payload"]["method"], "halasz");

    // f(n) = (-1)^{v_2(n)}
    let brute: i64 = (1..=n).map(|m| if m.trailing_zeros() % 2 == 0 { 1 } else { -1 }).sum();
    let direct = recs[0]["payload"]["value"]["re"].as_f64().unwrap();
    assert!((direct - brute as f64 / n as f64).abs() < 1e-12);
    let halasz = recs[1]["payload"]["value"]["re"].as_f64().unwrap();
    assert!((halasz - 1.0 / 3.0).abs() < 1e-12);
    let delta = recs[0]["payload"]["delta"].as_f64().unwrap();
    assert!((delta - (direct - halasz).abs()).abs() < 1e-12);
    assert!(delta < 1e-5);
}

#[test]
fn identities_hold_to_fifty() {
    let recs = records(&run(&["verify-identities", "--q-max", "50"]));
    assert_eq!(recs.len(), 4 * 50);
    for r in &recs {
        let p = &r["payload"];
        assert_eq!(p["holds"], true, "{p}");
        assert!(p["residual"].as_f64().unwrap() <= 1e-9, "{p}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "joint",
        "--T",
        &inputs("rotation_irrational.json"),
        "--S",
        &inputs("sys_skew_irrational.json"),
        "--F",
        &inputs("obs_torus.json"),
        "--G",
        &inputs("obs_torus.json"),
        "--schedule",
        "1e3,1e4,1e5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(records(&a).len(), 4);
}

#[test]
fn emitted_documents_reparse_to_equal_values() {
    let recs = records(&run(&["classify", "--system", &inputs("sys_chi3_rotation.json")]));
    let rec = &recs[0];
    let sys: MultSystem = serde_json::from_value(rec["params"]["system"].clone()).unwrap();
    let orig: MultSystem =
        serde_json::from_str(&std::fs::read_to_string(inputs("sys_chi3_rotation.json")).unwrap()).unwrap();
    assert_eq!(sys, orig);

    let modes = rec["payload"]["modes"].as_array().unwrap();
    let chi: DirichletCharacter = serde_json::from_value(modes[1]["pretends"]["character"].clone()).unwrap();
    assert_eq!(chi, characters_mod(3).unwrap()[1]);
    for m in modes {
        let g: FgMultFunction = serde_json::from_value(m["multiplier"].clone()).unwrap();
        assert_eq!(g, sys.multiplier(m["mode"].as_i64().unwrap()));
    }
}

#[test]
fn csv_output_has_header_and_rows() {
    let out = run(&["distance", "--fn", &inputs("liouville.json"), "--schedule", "1e2,1e3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "command,N,distance");
    assert!(lines[1].starts_with("distance,100,"));
    assert!(lines[2].starts_with("distance,1000,"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.jsonl");
    let out = run(&["primes", "--limit", "20", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("[2,3,5,7,11,13,17,19]"));
}

#[test]
fn malformed_json_reports_path_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"classes":[{"spec":{"type":"default"},"phase":{"type":"rational","num":1,"den":"x"}}]}"#)
        .unwrap();
    let out = run(&["mean", "--fn", path.to_str().unwrap(), "--N", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("classes[0].phase"), "{err}");
    assert!(err.contains("byte 84"), "{err}");
}

#[test]
fn overlapping_classes_are_named() {
    let out = run(&["mean", "--fn", &inputs("overlap.json"), "--N", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("classes 0 and 1 overlap"), "{err}");
}

#[test]
fn precondition_failure_exits_one() {
    // An irrational rotation has no rational recurrence table.
    let out = run(&["recurrence", "--T", &inputs("rotation_irrational.json"), "--A", "0", "--N", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["mean", "--fn", &inputs("liouville.json"), "--N", "1e3", "--schedule", "1e3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oversized_sieve_exits_two() {
    let out = run(&["mean", "--fn", &inputs("liouville.json"), "--N", "1e9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["mean", "--fn", &inputs("liouville.json"), "--N", "1e4", "--sieve-limit", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn example_inputs_all_run() {
    let cases: Vec<Vec<String>> = vec![
        vec!["average", "--system", "sys_liouville_rotation.json", "--F", "obs_z2.json", "--fn", "liouville.json"],
        vec!["spectra", "--system", "sys_skew_irrational.json", "--F", "obs_torus.json", "--T", "rotation_irrational.json"],
        vec!["configs", "--E", "set_bohr.json", "--N", "100", "--M", "1e4"],
        vec!["recurrence", "--T", "rotation_half.json", "--A", "0"],
        vec!["mean", "--fn", "liouville.json", "--method", "direct", "--char", "chi_mod3.json"],
        vec!["mean", "--fn", "chi3_lift.json", "--method", "direct", "--q", "3", "--r", "1"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(|a| if a.ends_with(".json") { inputs(a) } else { a.to_string() }).collect())
    .collect();
    for case in cases {
        let mut args: Vec<&str> = case.iter().map(String::as_str).collect();
        if !args.contains(&"--N") && args[0] != "spectra" {
            args.extend(["--schedule", "1e3,1e4"]);
        }
        let recs = records(&run(&args));
        assert!(!recs.is_empty(), "{args:?}");
    }
}
