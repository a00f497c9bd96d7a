use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qecverify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qecverify"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(p: &Path, body: &str) {
    std::fs::write(p, body).unwrap();
}

fn json_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn demo_prints_expected_verdicts() {
    let out = qecverify(&["demo"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("CPTP ok"));
    assert!(text.contains("ampliate noiseless: holds"));
    assert!(text.contains("normal noiseless: fails"));
    assert!(text.contains("correctable: holds"));
    assert!(text.contains("identity recovery quadruple: holds"));
}

#[test]
fn demo_emit_round_trips_through_checks() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("demo.json");
    assert_eq!(
        qecverify(&["demo", "--emit", path(&file)]).status.code(),
        Some(0)
    );

    let out = qecverify(&["check-ampliate", path(&file), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json_report(&out);
    assert_eq!(report["verdict"], "holds");
    assert_eq!(report["max_residual"].as_f64(), Some(0.0));
    assert!(report["lambda_table"]
        .as_object()
        .is_some_and(|t| !t.is_empty()));

    let out = qecverify(&["check-noiseless", path(&file), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let w = &json_report(&out)["witness"];
    assert!(w["indices"].is_array());
    assert!(w["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn non_square_kraus_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    let row = "[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]";
    write(
        &file,
        &format!(
            r#"{{"dim_A":1,"dim_B":2,"dim_B1":1,"dim_perp":2,"kraus":[[{row},{row},{row}]]}}"#
        ),
    );
    let out = qecverify(&["check-ampliate", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_trace_preserving_input_reports_residual() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("scaled.json");
    write(
        &file,
        r#"{"dim_A":1,"dim_B":2,"dim_B1":1,"dim_perp":0,"kraus":[[[[0.9,0.0],[0.0,0.0]],[[0.0,0.0],[0.9,0.0]]]]}"#,
    );
    let out = qecverify(&["check-correctable", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("trace preserving"), "{err}");
    assert!(err.contains("0.26") || err.contains("2.6"), "{err}");
}

#[test]
fn random_channel_fails_ampliate_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("random.json");
    let gen = qecverify(&[
        "generate",
        "--kind",
        "random",
        "--dim-a",
        "2",
        "--dim-b",
        "2",
        "--dim-b1",
        "1",
        "--dim-perp",
        "1",
        "--count",
        "3",
        "--seed",
        "5",
        "--emit",
        path(&file),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = qecverify(&["check-ampliate", path(&file), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report = json_report(&out);
    assert_eq!(report["verdict"], "fails");
    assert!(report["witness"]["kind"].is_string());
}

#[test]
fn synthesized_recovery_passes_quadruple_check() {
    let dir = tempfile::tempdir().unwrap();
    let channel = dir.path().join("ampliate.json");
    let recovery = dir.path().join("recovery.json");
    let gen = qecverify(&[
        "generate",
        "--kind",
        "ampliate",
        "--dim-a",
        "2",
        "--dim-b",
        "3",
        "--dim-b1",
        "2",
        "--dim-perp",
        "2",
        "--seed",
        "3",
        "--emit",
        path(&channel),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let syn = qecverify(&["synthesize", path(&channel), "--emit", path(&recovery)]);
    assert_eq!(
        syn.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&syn.stdout)
    );
    let out = qecverify(&[
        "check-quadruple",
        path(&channel),
        path(&recovery),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json_report(&out)["sigma"].is_array());
}

#[test]
fn apply_emits_a_density_operator() {
    let dir = tempfile::tempdir().unwrap();
    let channel = dir.path().join("demo.json");
    let state = dir.path().join("rho.json");
    let output = dir.path().join("out.json");
    assert_eq!(
        qecverify(&["demo", "--emit", path(&channel)]).status.code(),
        Some(0)
    );
    let zero = "[0.0,0.0]";
    let one = "[1.0,0.0]";
    let rows: Vec<String> = (0..4)
        .map(|i| {
            let cells: Vec<&str> = (0..4)
                .map(|j| if i == 0 && j == 0 { one } else { zero })
                .collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    write(
        &state,
        &format!(r#"{{"factor":"H","matrix":[{}]}}"#, rows.join(",")),
    );
    let out = qecverify(&[
        "apply",
        path(&channel),
        path(&state),
        "--emit",
        path(&output),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let emitted: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(emitted["factor"], "H");
}

#[test]
fn unknown_subcommand_exits_with_two() {
    assert_eq!(qecverify(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qecverify(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let channel = dir.path().join("demo.json");
    assert_eq!(
        qecverify(&["demo", "--emit", path(&channel)]).status.code(),
        Some(0)
    );
    let run = || qecverify(&["oracle", path(&channel), "--seed", "9", "--format", "json"]).stdout;
    let first = run();
    assert_eq!(first, run());
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["algebraic_confirmation"], true);
    assert_eq!(report["seed"], 9);
}

#[test]
fn report_can_be_written_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = qecverify(&["demo", "--format", "json", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["command"], "demo");
}
