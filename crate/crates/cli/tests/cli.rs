use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn analyze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analyze")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    jsonschema::validator_for(&serde_json::from_str(text).unwrap()).expect("schema compiles")
}

fn json_of(args: &[&str]) -> (Value, i32) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = analyze(&full);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    let errors: Vec<String> = schema().iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{args:?} violates the schema: {errors:#?}");
    assert_eq!(v["schema"], 1);
    (v, o.status.code().unwrap())
}

fn seed_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn theorem_rank_three_summary() {
    let o = analyze(&["theorem", "-n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(
        "4n-1 = 11 fixed points: 5 attracting, 6 repelling; Fix trivial; iwip: certified; ind = 3/2; ind(inverse) = 2"
    ));
}

#[test]
fn theorem_rank_two_is_degenerate() {
    let o = analyze(&["theorem", "-n", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("n=2 degenerate: Y_0 relation detected"));
    let (v, code) = json_of(&["theorem", "-n", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["first_failure"]["detail"], "n=2 degenerate: Y_0 relation detected");
}

#[test]
fn theorem_rank_six_json() {
    let (v, code) = json_of(&["theorem", "-n", "6"]);
    assert_eq!(code, 0);
    let r = &v["results"][0];
    assert_eq!(r["fixed_points"]["total"], 23);
    assert_eq!(r["index"]["alpha"]["total"], "9/2");
    assert_eq!(r["index"]["alpha_inverse"]["total"], "5");
    assert_eq!(r["index"]["alpha_inverse"]["parageometric"]["1"], "parageometric");
    assert_eq!(r["index"]["alpha"]["parageometric"]["2"], "neither");
}

#[test]
fn every_command_validates() {
    let a3 = seed_file("a1 -> a1 a2 a3\na2 -> a2 a1 a2\na3 -> a3 a1 a2 a3\n");
    let path = a3.path().to_str().unwrap();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["fixed-points", "-n", "3..4"], 0),
        (vec!["fixed-points", "-n", "3", "--power", "2", "--original-basis"], 0),
        (vec!["fixed-points", "-n", "2"], 1),
        (vec!["inps", "-n", "3"], 0),
        (vec!["inps", "-n", "4", "--inverse", "--mode", "straight"], 0),
        (vec!["iwip", "-n", "3", "--dot"], 0),
        (vec!["iwip", "-n", "4", "--inverse"], 0),
        (vec!["index", "-n", "3"], 0),
        (vec!["matrix", "-n", "3", "--power", "2"], 0),
        (vec!["matrix", "-n", "3", "--inverse"], 0),
        (vec!["custom", "--seed-file", path], 0),
    ];
    for (args, want) in cases {
        let (_, code) = json_of(&args);
        assert_eq!(code, want, "{args:?}");
    }
}

#[test]
fn output_is_deterministic_and_independent_of_jobs() {
    for format in ["text", "json"] {
        let one = analyze(&["theorem", "-n", "3..5", "--format", format, "--jobs", "1"]);
        let again = analyze(&["theorem", "-n", "3..5", "--format", format, "--jobs", "1"]);
        let many = analyze(&["theorem", "-n", "3..5", "--format", format, "--jobs", "3"]);
        assert_eq!(one.stdout, again.stdout);
        assert_eq!(one.stdout, many.stdout);
        assert_eq!(one.status.code(), Some(0));
    }
}

#[test]
fn input_errors_exit_three() {
    let bad_table = seed_file("a1 -> a1 b7\na2 -> a2\n");
    for args in [
        vec!["theorem", "-n", "1"],
        vec!["theorem", "-n", "3", "--depth", "5"],
        vec!["theorem", "-n", "x"],
        vec!["theorem", "-n", "3", "--jobs", "0"],
        vec!["custom", "--seed-file", "/nonexistent/table.txt"],
        vec!["custom", "--seed-file", bad_table.path().to_str().unwrap()],
        vec!["frobnicate"],
    ] {
        assert_eq!(analyze(&args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn custom_reducible_and_non_positive() {
    let swap = seed_file("a1 -> a2\na2 -> a1\n");
    let (v, code) = json_of(&["custom", "--seed-file", swap.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["results"][0]["iwip"]["verdict"], "reducible");

    // a1 -> a2, a2 -> a1 a2^-1: no sign flip makes it positive
    let mixed = seed_file("a1 -> a2\na2 -> a1 A2\n");
    let (v, code) = json_of(&["custom", "--seed-file", mixed.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(v["results"][0]["positive_basis"].is_null());

    // alpha_3^-1 given over a1..a3 is made positive by flipping a1
    let inv = seed_file(
        "a1 -> a1 a1 A3 a1 a1 A3 A2\na2 -> a2 a3 A1 A1\na3 -> a3 A1\n---\na1 -> a1 a2 a3\na2 -> a2 a1 a2\na3 -> a3 a1 a2 a3\n",
    );
    let (v, code) = json_of(&["custom", "--seed-file", inv.path().to_str().unwrap()]);
    let r = &v["results"][0];
    assert_eq!(r["positive_basis"], serde_json::json!(["x0", "a2", "a3"]));
    assert_eq!(r["inverse_verified"], true);
    assert_eq!(r["iwip"]["verdict"], "iwip");
    assert_eq!(code, 0);
}

#[test]
fn inverse_inps_are_reported_and_fix_certified() {
    let (v, code) = json_of(&["inps", "-n", "3", "--inverse"]);
    assert_eq!(code, 0);
    let r = &v["results"][0];
    assert_eq!(r["searches"]["straight"]["paths"].as_array().unwrap().len(), 3);
    assert_eq!(r["fix_trivial"], true);
}

#[test]
fn alpha_two_inps_not_conclusive_empty() {
    let (v, _) = json_of(&["inps", "-n", "2", "--mode", "straight"]);
    assert_eq!(v["results"][0]["searches"]["straight"]["conclusive_empty"], false);
    assert_eq!(v["results"][0]["fix_trivial"], false);
}
