use std::process::{Command, Output};

use serde_json::Value;

fn hartogs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hartogs"))
        .args(args)
        .env_remove("HARTOGS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

/// Splits stdout into the header record and the payload text.
fn split(out: &Output) -> (Value, String) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let (first, rest) = text.split_once('\n').expect("header line");
    let header = serde_json::from_str(first.strip_prefix("# ").expect("header prefix")).unwrap();
    (header, rest.to_string())
}

fn payload(out: &Output) -> Value {
    serde_json::from_str(&split(out).1).unwrap()
}

#[test]
fn coeffs_for_the_ball() {
    let out = hartogs(&["coeffs", "--n", "1", "--K", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, _) = split(&out);
    assert_eq!(header["subcommand"], "coeffs");
    assert!(header["timestamp"].is_null());
    let b: Vec<f64> = serde_json::from_value(payload(&out)["b"].clone()).unwrap();
    assert_eq!(b, vec![0.0, 0.0, 1.0]);
}

#[test]
fn coeffs_csv() {
    let out = hartogs(&["--format", "csv", "coeffs", "--n", "2", "--K", "0.5"]);
    let (_, body) = split(&out);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "i,b");
    assert_eq!(lines.len(), 1 + 4);
}

#[test]
fn classify_exit_codes() {
    let out = hartogs(&["classify", "--n", "2", "--K", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
    let p = payload(&out);
    assert_eq!(p["status"], "NotLuQiKeng");
    assert_eq!(p["witnesses"].as_array().unwrap().len(), 1);

    let out = hartogs(&["classify", "--n", "2", "--K", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(payload(&out)["status"], "LuQiKeng");
}

#[test]
fn sweep_finds_the_n3_threshold() {
    let out = hartogs(&["sweep", "--n", "3", "--k-lo", "0.5", "--k-hi", "0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let k = payload(&out)["K_star"].as_f64().unwrap();
    assert!((k - 0.5f64.sqrt()).abs() < 1e-5, "{k}");
}

#[test]
fn sweep_csv_ends_with_threshold_record() {
    let out = hartogs(&["--format", "csv", "sweep", "--n", "2", "--k-lo", "0.3", "--k-hi", "0.8"]);
    let (_, body) = split(&out);
    assert!(body.starts_with("K,margin\n"));
    let last: Value = serde_json::from_str(body.lines().last().unwrap()).unwrap();
    assert!((last["K_star"].as_f64().unwrap() - 0.5).abs() < 1e-5);
}

#[test]
fn sweep_without_sign_change_is_invalid_input() {
    let out = hartogs(&["sweep", "--n", "2", "--k-lo", "1", "--k-hi", "2"]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(payload(&out)["error"]["kind"], "NoSignChange");
}

#[test]
fn zero_locus_pairs_vanish() {
    let out = hartogs(&["zero-locus", "--n", "2", "--K", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    for pair in payload(&out)["pairs"].as_array().unwrap() {
        assert!(pair["normalized_kernel"].as_f64().unwrap() < 1e-8, "{pair}");
    }
}

#[test]
fn rep_coords_obstruction_is_structured() {
    let locus = payload(&hartogs(&["zero-locus", "--n", "2", "--K", "0.25"]));
    let pair = &locus["pairs"][0];
    let out = hartogs(&[
        "rep-coords",
        "--n",
        "2",
        "--K",
        "0.25",
        "--base",
        &pair["p"].to_string(),
        "--point",
        &pair["q"].to_string(),
    ]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(payload(&out)["error"]["kind"], "KernelZeroOnPath");
}

#[test]
fn hua_check_reads_json() {
    let input = r#"{"base":{"kind":"I","shape":[1,2]},"blocks":[{"dim":1,"p":2.0,"K":1.0}],"W":[[[0.3,0]]],"Z":[[0.2,0],[0.1,0]]}"#;
    let out = hartogs(&["hua-check", "--input", input]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(payload(&out)["member"], true);
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(hartogs(&["classify", "--bogus"]).status.code(), Some(64));
    assert_eq!(hartogs(&[]).status.code(), Some(64));
    assert_eq!(hartogs(&["--help"]).status.code(), Some(0));
    let out = hartogs(&["coeffs", "--n", "0", "--K", "1"]);
    assert_eq!(out.status.code(), Some(65));
    assert_eq!(payload(&out)["error"]["kind"], "InvalidSpec");
    let out = hartogs(&["kernel-eval", "--n", "1", "--K", "1", "--p", "[[2,0],[0,0]]", "--q", "[[0,0],[0,0]]"]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn numeric_failure_exit_code() {
    let out = hartogs(&["oracle-diff", "--n", "2", "--K", "0.5", "--pairs", "3", "--cutoff", "2"]);
    assert_eq!(out.status.code(), Some(70));
    assert_eq!(payload(&out)["error"]["kind"], "CutoffTooSmall");
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["--seed", "7", "--format", "csv", "oracle-diff", "--n", "2", "--K", "0.5", "--pairs", "8", "--cutoff", "60"];
    let a = hartogs(&args);
    let b = hartogs(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = hartogs(&["--threads", "1"].iter().chain(args.iter()).copied().collect::<Vec<_>>());
    assert_eq!(split(&a).1, split(&c).1);
}

#[test]
fn output_file_and_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hartogs"))
        .args(["--output", "coeffs.json", "coeffs", "--n", "1", "--K", "2"])
        .env("HARTOGS_OUTPUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("coeffs.json")).unwrap();
    assert!(text.starts_with("# {"));
}
