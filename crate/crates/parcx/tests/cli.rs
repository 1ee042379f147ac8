use std::process::Command;

use parcx::cli::{run, BredonTable, ComplexArtifact, SteinbergArtifact};
use parcx::exactalg::GroupRingModule;
use parcx::permgroups::symmetric_group;
use parcx::verify::VerificationReport;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("parcx").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn partition_complex_csv() {
    let (code, out, _) = call(&["--format", "csv", "partition-complex", "--n", "4"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), vec!["kind", "dimension", "index", "vertices", "label"]);
    let kinds: Vec<String> = rdr.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert_eq!(kinds.iter().filter(|k| *k == "vertex").count(), 13);
    assert_eq!(kinds.iter().filter(|k| *k == "edge").count(), 18);
}

#[test]
fn partition_complex_json_round_trips() {
    let (code, out, _) = call(&["partition-complex", "--n", "4", "--suspended", "--homology"]);
    assert_eq!(code, 0);
    let a: ComplexArtifact = serde_json::from_str(&out).unwrap();
    assert_eq!(a.counts, vec![15, 44, 36]);
    assert_eq!(a.group_order, 24);
    assert_eq!(a.reduced_homology.as_ref().unwrap()[2].rank, 6);
    let again: ComplexArtifact = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(again, a);
}

#[test]
fn dot_output() {
    let (code, out, _) = call(&["--format", "dot", "tits-building", "--k", "2", "--p", "3"]);
    assert_eq!(code, 0);
    assert!(out.trim_start().starts_with("digraph") || out.trim_start().starts_with("graph"));
}

#[test]
fn steinberg_json() {
    let (code, out, _) = call(&["steinberg", "--k", "2", "--p", "2"]);
    assert_eq!(code, 0);
    let s: SteinbergArtifact = serde_json::from_str(&out).unwrap();
    assert_eq!((s.rank, s.degree), (2, 1));
    assert!(s.tor1_trivial.is_zero());
    assert_eq!(s.action["matrices"].as_array().unwrap().len(), s.action["group"]["generators"].as_array().unwrap().len());
}

#[test]
fn bredon_tables() {
    let (code, out, _) = call(&["bredon-homology", "--n", "3", "--p", "3", "--coeff", "fp-trivial"]);
    assert_eq!(code, 0);
    let t: BredonTable = serde_json::from_str(&out).unwrap();
    assert_eq!(t.groups[0].to_string(), "Z/3");
    let (code, out, _) = call(&["bredon-cohomology", "--n", "4", "--p", "2", "--coeff", "constant", "--unreduced"]);
    assert_eq!(code, 0);
    let t: BredonTable = serde_json::from_str(&out).unwrap();
    assert_eq!(t.groups[0].rank, 1);
    let (_, a, _) = call(&["bredon-homology", "--n", "5", "--p", "2", "--coeff", "fp-sign"]);
    let (_, b, _) = call(&["bredon-homology", "--n", "5", "--p", "2", "--coeff", "fp-sign", "--shuffle-seed", "11"]);
    let (a, b): (BredonTable, BredonTable) = (serde_json::from_str(&a).unwrap(), serde_json::from_str(&b).unwrap());
    assert_eq!(a.groups, b.groups);
}

#[test]
fn module_file_coefficients() {
    let s3 = symmetric_group(3).unwrap();
    let m = GroupRingModule::sign(&s3, 0, Some(3)).unwrap();
    let path = std::env::temp_dir().join(format!("parcx-sign-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let coeff = format!("fp-module:{}", path.display());
    let (code, out, err) = call(&["verify-main-theorem", "--n", "3", "--p", "3", "--coeff", &coeff]);
    assert_eq!(code, 0, "{err}");
    let r: VerificationReport = serde_json::from_str(&out).unwrap();
    assert!(r.passed());
    let (code, _, err) = call(&["verify-main-theorem", "--n", "4", "--p", "2", "--coeff", &coeff]);
    assert_eq!(code, 2);
    assert!(err.contains("\"usage\""));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn exit_codes_and_error_json() {
    let (code, out, _) = call(&["verify-main-theorem", "--n", "3", "--p", "3", "--coeff", "fp-trivial"]);
    assert_eq!(code, 1);
    let r: VerificationReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.outcome.as_deref(), Some("hypotheses-fail, conclusion-false"));

    let (code, _, err) = call(&["partition-complex", "--n", "12"]);
    assert_eq!(code, 2);
    let e: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(e["error"], "capacity");
    assert!(e["message"].is_string());

    let (code, _, err) = call(&["bredon-homology", "--n", "4", "--p", "4", "--coeff", "fp-trivial"]);
    assert_eq!(code, 2);
    assert!(serde_json::from_str::<Value>(err.trim()).is_ok());

    let (code, _, err) = call(&["mackey-check", "--n", "3", "--p", "2", "--coeff", "nonsense"]);
    assert_eq!(code, 2);
    assert_eq!(serde_json::from_str::<Value>(err.trim()).unwrap()["error"], "usage");
}

#[test]
fn mackey_check_reports() {
    let (code, out, _) = call(&["mackey-check", "--n", "3", "--p", "3", "--coeff", "fp-sign"]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<VerificationReport>(&out).unwrap().passed());
    let (code, _, _) = call(&["mackey-check", "--n", "3", "--p", "3", "--coeff", "constant"]);
    assert_eq!(code, 1);
}

#[test]
fn survey_csv() {
    let (code, out, _) = call(&["--format", "csv", "fixed-point-survey", "--n", "4", "--p", "2"]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert!(rdr.records().count() > 0);
}

#[test]
fn output_file_option() {
    let path = std::env::temp_dir().join(format!("parcx-out-{}.json", std::process::id()));
    let p = path.display().to_string();
    let (code, out, _) = call(&["group-theory-cases", "--n", "4", "--p", "2", "-o", &p]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let r: VerificationReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r.passed());
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_parcx");
    let ok = Command::new(bin).args(["steinberg", "--k", "1", "--p", "3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let fail = Command::new(bin).args(["verify-main-theorem", "--n", "3", "--p", "3", "--coeff", "fp-trivial"]).output().unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let usage = Command::new(bin).arg("no-such-command").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&usage.stderr).unwrap();
    assert_eq!(e["error"], "usage");
}
