use std::path::{Path, PathBuf};

use coupled_fixpoint::cli::{run_cli, EXIT_ERROR, EXIT_FINDING, EXIT_OK};
use serde_json::Value;

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("coupled-fixpoint").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn solve_linear_instance() {
    let path = instance("l1.json");
    let (code, out, _) = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["status"], "converged");
    for k in 0..2 {
        let x = v["fixed_point"][k].as_f64().unwrap();
        assert!((x - 3.0 / 7.0).abs() < 1e-9);
    }
    assert_eq!(v["bound"]["certified"], true);
    assert_eq!(v["bound"]["holds"], true);
}

#[test]
fn oracle_on_floor_instance() {
    let path = instance("f1.json");
    let (code, out, _) = run(&["oracle", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["fixed_points"], serde_json::json!([[0, 0], [0, 1], [1, 0]]));
    assert_eq!(v["contraction"]["outcome"], "violated");
}

#[test]
fn check_reports_violations() {
    let path = instance("f1.json");
    let (code, out, _) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_FINDING);
    assert!(out.contains("uniform_local_contraction"));
}

#[test]
fn invalid_instance_exits_two() {
    let path = instance("broken.json");
    let (code, out, err) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    assert!(out.is_empty());
    assert!(err.contains("symmetry"), "{err}");
}

#[test]
fn missing_file_and_bad_usage_exit_two() {
    assert_eq!(run(&["solve", "/nonexistent/instance.json"]).0, EXIT_ERROR);
    assert_eq!(run(&["frobnicate"]).0, EXIT_ERROR);
    assert_eq!(run(&["gen", "--seed", "1"]).0, EXIT_ERROR);
    assert_eq!(run(&["gen", "--seed", "1", "--size", "1"]).0, EXIT_ERROR);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("solve"));
}

#[test]
fn gen_is_deterministic_and_solvable() {
    let (code, a, _) = run(&["gen", "--seed", "42", "--size", "9"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(a, run(&["gen", "--seed", "42", "--size", "9"]).1);
    assert_ne!(a, run(&["gen", "--seed", "43", "--size", "9"]).1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, &a).unwrap();
    let (code, out, _) = run(&["oracle", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(!json(&out)["fixed_points"].as_array().unwrap().is_empty());
}

#[test]
fn batch_mode_reports_each_file() {
    let dir = instance("");
    let (code, out, _) = run(&["check", "--all", dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let names: Vec<&str> = rows
        .iter()
        .map(|r| Path::new(r["file"].as_str().unwrap()).file_name().unwrap().to_str().unwrap())
        .collect();
    assert_eq!(names, ["broken.json", "clipped.json", "f1.json", "l1.json", "plane.json"]);
    assert_eq!(rows[0]["exit"], EXIT_ERROR);
    assert!(rows[0]["error"].is_string());
    assert_eq!(rows[3]["exit"], EXIT_OK);
}

#[test]
fn trace_files_are_written_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let path = instance("l1.json");
    let mut traces = Vec::new();
    for (i, format) in ["csv", "csv", "jsonl"].iter().enumerate() {
        let out_path = dir.path().join(format!("t{i}.{format}"));
        let (code, _, _) = run(&[
            "solve",
            path.to_str().unwrap(),
            "--trace-out",
            out_path.to_str().unwrap(),
            "--trace-format",
            format,
        ]);
        assert_eq!(code, EXIT_OK);
        traces.push(std::fs::read_to_string(out_path).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    let csv: Vec<&str> = traces[0].lines().collect();
    assert_eq!(csv[0], "m,x,y,residual,eta_step,bound");
    assert!(csv[2].starts_with("1,0.25,0.625,"));
    let first: Value = json(traces[2].lines().next().unwrap());
    assert_eq!(first["m"], 0);
    assert_eq!(first["eta_step"], Value::Null);
    assert_eq!(traces[2].lines().count(), csv.len() - 1);
}

#[test]
fn chain_and_lemma_subcommands() {
    let path = instance("f1.json");
    let (code, out, _) = run(&["chain", path.to_str().unwrap(), "--from", "0", "--to", "3", "--eps", "1.5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["n"], 3);
    let (code, _, _) = run(&["chain", path.to_str().unwrap(), "--from", "0", "--to", "3", "--eps", "0.5"]);
    assert_eq!(code, EXIT_FINDING);

    let l1 = instance("l1.json");
    let (code, out, _) = run(&["verify-lemma", l1.to_str().unwrap(), "--horizon", "20"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["all_below_bound"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 21);
}
