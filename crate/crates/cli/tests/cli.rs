use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn acopf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acopf"))
        .arg("run")
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn both_formulations_on_one_case_write_reports() {
    let out = tempfile::tempdir().unwrap();
    let case = data("cases/case14.m");
    let refs = data("refs.json");
    let o = acopf(&[
        "--case",
        s(&case),
        "--formulation",
        "both",
        "--refs",
        s(&refs),
        "--out",
        s(out.path()),
        "--verify-pf",
        "--cycle-report",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["table1.csv", "delta_v.csv", "cycle_sums.csv", "runs.json", "cycle_report.csv"] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }
    let table = std::fs::read_to_string(out.path().join("table1.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("case14"));
    let report = std::fs::read_to_string(out.path().join("cycle_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 2 * 8);
}

#[test]
fn iteration_cap_gives_nonzero_exit() {
    let out = tempfile::tempdir().unwrap();
    let case = data("cases/case9.m");
    let o = acopf(&[
        "--case",
        s(&case),
        "--formulation",
        "relaxed",
        "--out",
        s(out.path()),
        "--max-iters",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dump_case_prints_json_without_solving() {
    let out = tempfile::tempdir().unwrap();
    let case = data("cases/case9.m");
    let o = acopf(&["--case", s(&case), "--out", s(out.path()), "--dump-case"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.trim_start().starts_with('{'));
    assert!(!out.path().join("table1.csv").exists());
}

#[test]
fn dump_program_writes_a_file_for_a_single_run() {
    let out = tempfile::tempdir().unwrap();
    let dumps = out.path().join("programs");
    let case = data("cases/case9.m");
    let o = acopf(&[
        "--case",
        s(&case),
        "--formulation",
        "new",
        "--beta",
        "1000",
        "--out",
        s(out.path()),
        "--dump-program",
        s(&dumps),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dumps.is_file());
    assert!(std::fs::metadata(&dumps).unwrap().len() > 0);
}

#[test]
fn bad_arguments_are_rejected() {
    let out = tempfile::tempdir().unwrap();
    let case = data("cases/case9.m");
    let o = acopf(&["--case", s(&case), "--out", s(out.path()), "--beta", "-1"]);
    assert!(!o.status.success());
    let o = acopf(&["--case", s(&case), "--out", s(out.path()), "--solver", "mosek"]);
    assert_eq!(o.status.code(), Some(2));
    let o = acopf(&["--case", "/nonexistent", "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
}
