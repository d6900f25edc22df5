use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_connmat")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// (row label, column label) pairs of a connect document.
fn labeled_entries(doc: &Value) -> Vec<(String, String)> {
    let label = |p: &Value| -> String {
        let pos = p.as_u64().unwrap() as usize;
        doc["basis"][pos - 1].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect()
    };
    let mut out: Vec<(String, String)> =
        doc["entries"].as_array().unwrap().iter().map(|e| (label(&e[0]), label(&e[1]))).collect();
    out.sort();
    out
}

fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn validate_accepts_annulus() {
    let out = run(&["validate", data("annulus.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("11 simplices"));
}

#[test]
fn validate_reports_uncovered_simplex() {
    let text = std::fs::read_to_string(data("annulus.json")).unwrap().replace(r#"[["D"], ["A", "D"]],"#, r#"[["A", "D"]],"#);
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", &write_temp(&dir, "in.json", &text)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("uncovered simplex D"), "{}", stderr(&out));
}

#[test]
fn validate_reports_missing_face() {
    let text = r#"{"format": 1, "complex": {"simplices": [["A"], ["A", "B"]]}, "multivectors": [[["A"]], [["A", "B"]]]}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", &write_temp(&dir, "in.json", text)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing face"), "{}", stderr(&out));
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["connect", &write_temp(&dir, "in.json", "{\n \"format\": 1,\n ]")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn invalid_morse_partition_is_a_validation_failure() {
    let mut input: Value = serde_json::from_str(&std::fs::read_to_string(data("edge.json")).unwrap()).unwrap();
    input["morse_sets"] = serde_json::json!([[["A"]], [["B"]], [["A", "B"]]]);
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", &write_temp(&dir, "in.json", &input.to_string())]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn connect_annulus() {
    let out = run(&["connect", data("annulus.json").to_str().unwrap(), "--verify", "--emit-trace"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = stdout_json(&out);
    assert_eq!(doc["surviving"].as_array().unwrap().len(), 5);
    assert_eq!(labeled_entries(&doc), pairs(&[("AC", "ABC"), ("AC", "ACD"), ("CD", "ACD")]));
    assert_eq!(doc["trace"].as_array().unwrap().len(), 4);
    assert!(doc["certificate"]["checks"].as_object().unwrap().values().all(|v| v == true));
    assert!(doc["certificate"]["witness"].is_null());
}

#[test]
fn intra_order_changes_both_triangle_columns() {
    let out = run(&[
        "connect",
        data("annulus.json").to_str().unwrap(),
        "--intra-order",
        data("annulus_alt_order.json").to_str().unwrap(),
        "--verify",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(labeled_entries(&stdout_json(&out)), pairs(&[("AC", "ABC"), ("AC", "ACD"), ("BC", "ABC")]));
}

fn surviving_labels(doc: &Value) -> Vec<String> {
    let mut out: Vec<String> = doc["labels"]
        .as_object()
        .unwrap()
        .values()
        .map(|s| s.as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect())
        .collect();
    out.sort();
    out
}

#[test]
fn linext_seeds_do_not_change_annulus_matrix() {
    let input = data("annulus.json");
    let reference = stdout_json(&run(&["connect", input.to_str().unwrap()]));
    let mut bases = std::collections::BTreeSet::new();
    for seed in 0..12 {
        let doc = stdout_json(&run(&["connect", input.to_str().unwrap(), "--linext-seed", &seed.to_string()]));
        // the two triangles are incomparable and may swap positions
        assert_eq!(labeled_entries(&doc), labeled_entries(&reference), "seed {seed}");
        assert_eq!(surviving_labels(&doc), surviving_labels(&reference), "seed {seed}");
        bases.insert(doc["basis"].to_string());
    }
    assert_eq!(bases.len(), 2);
}

#[test]
fn output_is_deterministic() {
    let input = data("annulus.json");
    let args = ["connect", input.to_str().unwrap(), "--emit-trace", "--emit-matrix", "--verify"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_goes_to_stderr() {
    let out = run(&["connect", data("annulus.json").to_str().unwrap(), "--report"]);
    let report: Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert_eq!(report["n"], 11);
    assert_eq!(report["events"], 4);
    assert!(stdout_json(&out)["entries"].is_array());
}

#[test]
fn verify_round_trip() {
    let input = data("annulus.json");
    let connect = run(&["connect", input.to_str().unwrap(), "--verify"]);
    let mut doc = stdout_json(&connect);
    let embedded = doc["certificate"].take();
    doc.as_object_mut().unwrap().remove("certificate");
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "cm.json", &doc.to_string());
    let out = run(&["verify", input.to_str().unwrap(), &path]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout_json(&out), embedded);
}

#[test]
fn verify_rejects_corrupted_entry() {
    let input = data("annulus.json");
    let mut doc = stdout_json(&run(&["connect", input.to_str().unwrap()]));
    // add (CD, ABC): positions 7 and 10
    doc["entries"].as_array_mut().unwrap().push(serde_json::json!([7, 10]));
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", input.to_str().unwrap(), &write_temp(&dir, "cm.json", &doc.to_string())]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let cert = stdout_json(&out);
    assert!(cert["witness"].is_string());
    assert!(cert["checks"]["conley_index"] == false || cert["checks"]["reduction_pairs"] == false);
}

#[test]
fn bench_csv() {
    let out = run(&["bench", "--generator", "singleton", "--sizes", "50,100", "--repeat", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,sets,events,reduce_ms,total_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("0")));

    let out = run(&["bench", "--generator", "random-forman", "--sizes", "500", "--sequential"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(row[2] <= row[0] * row[0]);

    let out = run(&["bench", "--generator", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}
