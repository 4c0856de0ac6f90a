use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn refmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refmc")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = refmc(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn exemplar(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/exemplars").join(format!("{name}.txt"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn group_info_and_validate() {
    let info = ok(&["group", "info", "G23"]);
    assert!(info.contains("order\t120"));
    assert!(info.contains("reflections\t15"));
    assert!(ok(&["group", "validate", "G25"]).starts_with("G25: order 648 ok"));
    assert!(!refmc(&["group", "info", "G99"]).status.success());
}

#[test]
fn imprim_construct() {
    let out = ok(&["imprim", "construct", "--m", "5", "--p", "1", "--n", "3", "--T", "3"]);
    assert_eq!(out.lines().next(), Some("s(2,3;1) s(1,2;1) s(3;1)"));
    assert_eq!(ok(&["imprim", "construct", "--m", "3", "--p", "3", "--n", "3", "--T", "4"]).trim(), "none");
    assert!(!refmc(&["imprim", "construct", "--m", "4", "--p", "2", "--n", "2", "--T", "3"]).status.success());
}

#[test]
fn imprim_verify_small() {
    let out = ok(&["imprim", "verify", "--m-max", "3"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("m\tp\tn\tT\texists\twitness\tlambda\tbrute"));
    assert_eq!(lines.count(), 4 * (2 + 2));
}

#[test]
fn convolution_to_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let a = exemplar("G23_3_A");
    assert_eq!(ok(&["mc", "--tuple", s(&a), "--lambda", "2:1", "--check-only"]).trim(), "2");
    let mc = dir.path().join("mc.txt");
    ok(&["mc", "--tuple", s(&a), "--lambda", "2:1", "--out", s(&mc)]);
    let induced = dir.path().join("induced.txt");
    std::fs::write(&induced, ok(&["induce", "--tuple", s(&mc)])).unwrap();
    let orbit = ok(&["orbit", "--tuple", s(&induced), "--emit-signatures"]);
    let mut lines = orbit.lines();
    assert_eq!(lines.next(), Some("40"));
    assert_eq!(lines.count(), 40);
    assert!(ok(&["subgroup", "--tuple", s(&induced)]).starts_with("0 (infinite"));
    assert!(!refmc(&["mc", "--tuple", s(&a), "--lambda", "1:0"]).status.success());
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["run", "--group", "G23", "--T", "3", "--out", s(dir.path()), "--threads", "1"]);
    assert!(out.starts_with("# G23 nice 3-tuples\n"));
    assert!(out.contains("# distinct orbits: "));
    let md = ok(&["report", "--dir", s(dir.path()), "--format", "md"]);
    assert!(md.starts_with("### G23 nice 3-tuples"));
    assert_eq!(md.lines().filter(|l| l.starts_with("| ") && !l.starts_with("| Type")).count(), 9);
    assert!(!refmc(&["report", "--dir", s(dir.path()), "--format", "html"]).status.success());
    assert!(!refmc(&["run", "--group", "G32", "--T", "5"]).status.success());
}
