use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn transoval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transoval"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn construct(dir: &Path, h: &str, k: &str, i: &str) {
    let out = transoval(&[
        "construct",
        "--h",
        h,
        "--k",
        k,
        "--i",
        i,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn count(path: &Path) -> u64 {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(
        v["points"].as_array().unwrap().len() as u64,
        v["count"].as_u64().unwrap()
    );
    v["count"].as_u64().unwrap()
}

/// Drops wall-clock fields so reports can be compared.
fn without_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("millis");
            map.values_mut().for_each(without_timings);
        }
        Value::Array(xs) => xs.iter_mut().for_each(without_timings),
        _ => {}
    }
}

#[test]
fn construct_writes_three_files_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    construct(a.path(), "3", "2", "1");
    construct(b.path(), "3", "2", "1");
    assert_eq!(count(&a.path().join("hyperoval.json")), 66);
    assert_eq!(count(&a.path().join("q.json")), 64);
    assert_eq!(count(&a.path().join("d.json")), 63);
    for name in ["hyperoval.json", "q.json", "d.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn nonstrict_parameters_need_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = transoval(&["construct", "--h", "4", "--k", "2", "--i", "2", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let out = transoval(&[
        "construct",
        "--h",
        "4",
        "--k",
        "2",
        "--i",
        "2",
        "--allow-nonstrict",
        "--out",
        d,
    ]);
    assert!(out.status.success());
}

#[test]
fn spectrum_of_constructed_directions() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let d = dir.path().join("d.json");
    for mode in ["pairs", "exhaustive"] {
        let out = transoval(&["spectrum", d.to_str().unwrap(), "--mode", mode]);
        assert!(out.status.success());
        let v = json(&out);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["total"], 4745);
        assert_eq!(
            v["counts"],
            serde_json::json!({"7": 9, "3": 588, "1": 2772, "0": 1376})
        );
    }
}

#[test]
fn spectrum_of_empty_set_and_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let d = dir.path().join("d.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&d).unwrap()).unwrap();
    v["points"] = serde_json::json!([]);
    v["count"] = serde_json::json!(0);
    let empty = dir.path().join("empty.json");
    fs::write(&empty, v.to_string()).unwrap();
    let out = transoval(&["spectrum", empty.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["counts"], serde_json::json!({"0": 4745}));

    v["points"] = serde_json::json!(["zz"]);
    v["count"] = serde_json::json!(1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    let out = transoval(&["spectrum", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn wrong_file_kind_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let out = transoval(&["spectrum", dir.path().join("q.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn directions_command_matches_construct() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let again = dir.path().join("d2.json");
    let out = transoval(&[
        "directions",
        dir.path().join("q.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(&again).unwrap(),
        fs::read(dir.path().join("d.json")).unwrap()
    );
}

#[test]
fn pseudoregulus_and_spread_commands() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let d = dir.path().join("d.json");
    let out = transoval(&["detect-pseudoregulus", d.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["secants"].as_array().unwrap().len(), 9);
    assert_eq!(v["f"].as_array().unwrap().len(), 9);
    assert_eq!(v["fit"]["exponent_set"], serde_json::json!([1, 5]));

    let out = transoval(&["build-spread", d.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["size"], 65);
    assert_eq!(v["one_point"]["holds"], true);
}

#[test]
fn plane_and_axiom_commands() {
    let dir = tempfile::tempdir().unwrap();
    construct(dir.path(), "3", "2", "1");
    let q = dir.path().join("q.json");
    let out = transoval(&["bruck-bose-verify", q.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["hyperoval"]["size"], 66);
    let out = transoval(&["bj-axioms", q.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(json(&out)["axioms"]["family_size"], 72);
}

#[test]
fn verify_all_pass_and_negative_control() {
    let out = transoval(&["verify-all", "--h", "3", "--k", "2", "--i", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "pass");

    let out = transoval(&[
        "verify-all",
        "--h",
        "4",
        "--k",
        "2",
        "--i",
        "2",
        "--allow-nonstrict",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "fail");
    assert_eq!(v["failed_stage"], "spectrum");
}

#[test]
fn budget_exceeded_exits_3() {
    let out = transoval(&[
        "verify-all",
        "--h",
        "3",
        "--k",
        "2",
        "--i",
        "1",
        "--budget",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads: &str| {
        let out = transoval(&[
            "verify-all",
            "--h",
            "3",
            "--k",
            "2",
            "--i",
            "1",
            "--skip-bj",
            "--plane-check",
            "sampled",
            "--samples",
            "20000",
            "--parallel",
            threads,
        ]);
        assert!(out.status.success());
        let mut v = json(&out);
        without_timings(&mut v);
        v
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn unknown_arguments_exit_2() {
    assert_eq!(
        transoval(&["verify-all", "--h", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        transoval(&["spectrum", "x.json", "--mode", "sometimes"])
            .status
            .code(),
        Some(2)
    );
}
