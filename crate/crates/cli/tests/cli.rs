use std::process::Command;

use defq_cli::{run, Outcome, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn defq(args: &[&str]) -> Outcome {
    run(std::iter::once("defq").chain(args.iter().copied()))
}

fn report(out: &Outcome) -> Value {
    serde_json::from_str(&out.stdout).expect("json report")
}

fn verdict(r: &Value, name: &str) -> String {
    r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == name)
        .unwrap_or_else(|| panic!("no entry {name}"))["verdict"]
        .as_str()
        .unwrap()
        .to_string()
}

#[test]
fn moyal_axioms_pass() {
    let out = defq(&["star-verify", "--rule", "moyal", "--dof", "1", "--order", "5", "--samples", "5"]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stdout);
}

#[test]
fn pointwise_fails_the_first_order_axiom() {
    let out = defq(&["star-verify", "--rule", "pointwise", "--dof", "1", "--samples", "3"]);
    assert_eq!(out.code, EXIT_FAIL);
    assert_eq!(verdict(&report(&out), "c1_poisson"), "fail");
}

#[test]
fn malformed_json_is_an_input_error() {
    let out = defq(&["gns", "--algebra", &data("malformed.json"), "--functional", &data("trace.json")]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_flag_is_an_input_error() {
    assert_eq!(defq(&["psd", "--matrix"]).code, EXIT_INPUT);
    assert_eq!(defq(&["star-verify", "--rule", "moyal", "--samples", "0"]).code, EXIT_INPUT);
}

#[test]
fn gns_of_trace_has_rank_four() {
    let out = defq(&["gns", "--algebra", &data("m2.json"), "--functional", &data("trace.json")]);
    assert_eq!(out.code, EXIT_PASS);
    assert_eq!(report(&out)["output"]["rank"], 4);
}

#[test]
fn gns_rejects_non_positive_functional_with_witness() {
    let out = defq(&["gns", "--algebra", &data("diag2.json"), "--functional", &data("diff.json")]);
    assert_eq!(out.code, EXIT_FAIL);
    let r = report(&out);
    let e = r["entries"].as_array().unwrap().iter().find(|e| e["name"] == "functional_positive").unwrap();
    assert!(e["witness"]["element"].is_array());
}

#[test]
fn wick_fock_norms() {
    let out = defq(&[
        "--format",
        "text",
        "--order",
        "6",
        "gns",
        "--algebra",
        &data("wick3.json"),
        "--functional",
        &data("origin.json"),
    ]);
    assert_eq!(out.code, EXIT_PASS);
    assert!(out.stdout.contains("zb^3: 48λ^3"), "{}", out.stdout);
}

#[test]
fn psd_with_certificate() {
    let out = defq(&["psd", "--matrix", &data("diag_1_lambda.json")]);
    assert_eq!(out.code, EXIT_PASS);
    assert_eq!(report(&out)["entries"][0]["certificate"].as_array().unwrap().len(), 2);
}

#[test]
fn cp_of_free_module_and_negative_metric() {
    let out = defq(&["cp", "--module", &data("free2.json"), "--classical-limit"]);
    assert_eq!(out.code, EXIT_PASS);
    let out = defq(&["cp", "--module", &data("negative_metric.json")]);
    assert_eq!(out.code, EXIT_FAIL);
}

#[test]
fn induce_identity_and_cp_failure() {
    let out = defq(&["induce", "--bimodule", &data("identity_scalars.json"), "--representation", &data("trivial_rep.json")]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stdout);
    let out = defq(&["induce", "--request", &data("cp_failing_request.json")]);
    assert_eq!(out.code, EXIT_FAIL);
}

#[test]
fn induce_gns_cross_check() {
    let out = defq(&["induce", "--gns-check", "--algebra", &data("m2.json"), "--functional", &data("trace.json")]);
    assert_eq!(out.code, EXIT_PASS);
    assert_eq!(verdict(&report(&out), "canonical.isometric"), "pass");
}

#[test]
fn morita_standard_module() {
    let out = defq(&[
        "morita",
        "--spec",
        &data("standard2_m2.json"),
        "--functional",
        &data("trace.json"),
        "--functional",
        &data("vector_state_m2.json"),
        "--samples",
        "5",
    ]);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stdout);
    let r = report(&out);
    assert_eq!(verdict(&r, "roundtrip2.canonical.intertwines"), "pass");
    assert!(r["output"]["dual_bases"]["xi"].is_array());
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["star-verify", "--rule", "wick", "--samples", "4", "--seed", "9"];
    assert_eq!(defq(&args).stdout, defq(&args).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("defq-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = defq(&["psd", "--matrix", &data("diag_1_lambda.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_PASS);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["status"], "pass");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_defq");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(status(&["psd", "--matrix", &data("diag_1_lambda.json")]), 0);
    assert_eq!(status(&["cp", "--module", &data("negative_metric.json")]), 1);
    assert_eq!(status(&["psd", "--matrix", &data("malformed.json")]), 3);
}
