use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ontolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontolab")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bundled_documents_pass() {
    for cmd in ["verify-model", "theorem-check", "ks-search", "chsh", "wigner", "bohm"] {
        let out = ontolab(&[cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let rep = report(&out);
        assert_eq!(rep["command"], cmd);
        assert_eq!(rep["passed"], true);
        assert!(rep["input"].as_str().unwrap().starts_with("bundled:"));
        assert_eq!(rep["input_digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn ks_search_reports_zero_assignments() {
    let rep = report(&ontolab(&["ks-search"]));
    assert_eq!(rep["results"]["count"], 0);
}

#[test]
fn chsh_reaches_tsirelson_bound() {
    let rep = report(&ontolab(&["chsh"]));
    let text = rep["results"].to_string();
    assert!(text.contains("2.828427124746"), "{text}");
}

#[test]
fn defaults_are_echoed() {
    let rep = report(&ontolab(&["chsh"]));
    let opts = rep["options"].as_object().unwrap();
    for key in ["seed", "tol", "grid_steps", "refine_iters"] {
        assert!(opts.contains_key(key), "missing option {key}");
    }
    assert_eq!(opts["seed"], 0);
    let rep = report(&ontolab(&["chsh", "--seed", "5", "--tol", "0.001"]));
    assert_eq!(rep["options"]["seed"], 5);
    assert_eq!(rep["options"]["tol"], 0.001);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ontolab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(ontolab(&[]).status.code(), Some(2));
    assert_eq!(ontolab(&["chsh", "--seed", "minus-one"]).status.code(), Some(2));
    assert_eq!(ontolab(&["bohm", "/nonexistent/doc.json"]).status.code(), Some(2));
}

#[test]
fn parse_errors_name_the_entry() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"dim": 2, "states": [{"name": "up", "vector": [1, 0]}, {"name": "lopsided", "vector": [1, 0, 0]}]}"#,
    );
    let out = ontolab(&["verify-model", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lopsided"));

    let junk = write(dir.path(), "junk.json", "{\"dim\": 2,");
    assert_eq!(ontolab(&["verify-model", &junk]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "ks.json",
        r#"{"dim": 2,
            "states": [{"name": "z", "vector": [1, 0]}, {"name": "x", "vector": [0.7071067811865476, 0.7071067811865476]}],
            "model": {"kind": "ks", "lattice": 2000}}"#,
    );
    let out = ontolab(&["theorem-check", &doc]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn exported_model_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let exported = dir.path().join("model.json");
    let out = ontolab(&["verify-model", "--export-model", exported.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&exported).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["model"]["kind"], "table");

    let out = ontolab(&["verify-model", exported.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["passed"], true);
}

#[test]
fn csv_table_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let out = ontolab(&["wigner", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.split(',').count() >= 2);
    let first = lines.next().unwrap();
    assert!(first.contains('e'), "floats use exponent notation: {first}");
}

#[test]
fn complex_amplitudes_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let doc = write(
        dir.path(),
        "y.json",
        r#"{"dim": 2,
            "states": [{"name": "y", "vector": [[0.7071067811865476, 0], [0, 0.7071067811865476]]},
                       {"name": "z", "vector": [1, 0]}],
            "model": {"kind": "delta"}}"#,
    );
    let out = ontolab(&["verify-model", &doc]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn same_seed_same_bytes() {
    let a = ontolab(&["chsh", "--seed", "3"]);
    let b = ontolab(&["chsh", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}
