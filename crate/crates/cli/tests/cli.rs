use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn biinterp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biinterp")).args(args).env_remove("BIINTERP_BUDGET").output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const SQUARES: &str = "exists y. y*y = x";

#[test]
fn verify_passes_on_s3() {
    let out = biinterp(&["verify", "--group", "dihedral:3", "--kappa", SQUARES, "--suite-size", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["verdict"], "bi-interpretable");
    let names: Vec<&str> = report["steps"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names.first(), Some(&"hypotheses"));
    assert_eq!(names.last(), Some(&"translation-soundness"));
}

#[test]
fn standard_mode_on_index_two_records_the_collision() {
    let out = biinterp(&["verify", "--group", "cyclic:4", "--kappa", SQUARES, "--mode", "standard"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    let last = report["steps"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["name"], "gamma-isomorphism");
    assert_eq!(last["counterexample"]["elements"], serde_json::json!([1, 2]));
    assert_eq!(last["counterexample"]["tuple"], serde_json::json!([1, 0]));
}

#[test]
fn input_errors_exit_two() {
    let out = biinterp(&["verify", "--group", "cyclic:4", "--kappa", "x * = 1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = biinterp(&["verify", "--group", "nosuchgroup:3", "--kappa", SQUARES]);
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_biinterp"))
        .args(["verify", "--group", "cyclic:4", "--kappa", SQUARES])
        .env("BIINTERP_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn not_normal_subgroup_is_a_verdict() {
    let out = biinterp(&["verify", "--group", "dihedral:3", "--kappa", "x = 1 | x = #3"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["steps"][0]["name"], "hypotheses");
    assert_eq!(report["steps"][0]["counterexample"]["reason"], "not normal");
}

#[test]
fn budget_cap_exits_two_and_keeps_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.json");
    let out = biinterp(&[
        "verify",
        "--group",
        "symmetric:4",
        "--kappa",
        "x*x = 1 & exists y. y*y = x",
        "--budget",
        "1000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("complexity cap"));
    let partial: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(partial["verdict"], "not verified");
}

#[test]
fn translate_reports_both_sides() {
    let out =
        biinterp(&["translate", "--group", "dihedral:3", "--kappa", SQUARES, "--phi", "forall x. forall y. x*y = y*x"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("source: false, target: false"), "{text}");
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("forall x_0."));
}

#[test]
fn codec_dump_lists_every_element() {
    let out = biinterp(&["codec", "--group", "quaternion8", "--kappa", "forall y. x*y = y*x"]);
    assert_eq!(out.status.code(), Some(0));
    let dump = stdout_json(&out);
    assert_eq!(dump["order"], 8);
    assert_eq!(dump["codec"]["mode"], "standard");
    assert_eq!(dump["codec"]["width"], 4);
    assert_eq!(dump["codec"]["roster"].as_array().unwrap().len(), 8);
}

#[test]
fn axiomatize_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("s3.json");
    let cert = cert.to_str().unwrap();
    let out = biinterp(&["axiomatize", "--group", "dihedral:3", "--tuple", "1,3", "--out", cert]);
    assert_eq!(out.status.code(), Some(0));

    let out = biinterp(&["check-axiom", "--cert", cert, "--group", "dihedral:3", "--tuple", "2,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["holds"], true);

    let out = biinterp(&["check-axiom", "--cert", cert, "--group", "cyclic:6", "--tuple", "1,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["holds"], false);

    let out = biinterp(&["check-axiom", "--cert", cert, "--group", "dihedral:3", "--tuple", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let out = biinterp(&["axiomatize", "--group", "dihedral:3", "--tuple", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_corpus_succeeds() {
    let out = biinterp(&["corpus", "--empty"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn corpus_file_with_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let instances = dir.path().join("instances.json");
    let rows = dir.path().join("rows.json");
    fs::write(
        &instances,
        r#"[
            {"name": "s3", "group": "dihedral:3", "kappa": "exists y. y*y = x"},
            {"name": "s3-faulty", "group": "dihedral:3", "kappa": "exists y. y*y = x",
             "cocycle_fault": {"i": 2, "j": 2, "value": 1}}
        ]"#,
    )
    .unwrap();
    let out = biinterp(&["corpus", "--instances", instances.to_str().unwrap(), "--out", rows.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rows: Value = serde_json::from_str(&fs::read_to_string(&rows).unwrap()).unwrap();
    assert_eq!(rows[0]["instance"], "s3");
    assert_eq!(rows[0]["verdict"], "bi-interpretable");
    assert_eq!(rows[1]["failure"], "extension-identities");
}

#[test]
fn group_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c4.json");
    fs::write(&path, r#"{"format": "cayley", "order": 4, "table": [[0,1,2,3],[1,2,3,0],[2,3,0,1],[3,0,1,2]]}"#)
        .unwrap();
    let out = biinterp(&["verify", "--group", path.to_str().unwrap(), "--kappa", SQUARES]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
