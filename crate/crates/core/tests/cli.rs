//! The `duality-lab` binary: exit codes and output files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duality-lab")).args(args).current_dir(dir).output().unwrap()
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn residual_suites_exit_zero_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, format, file) in [
        ("check-algebra", "csv", "report.csv"),
        ("check-exact", "json", "report.json"),
        ("check-pointwise", "csv", "report.csv"),
        ("reproduce-examples", "json", "report.json"),
    ] {
        let out = dir.path().join(cmd);
        let o = run(dir.path(), &[cmd, "--out", out.to_str().unwrap(), "--format", format]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).is_file());
        let log = fs::read_to_string(out.join("run.log")).unwrap();
        assert!(log.contains("status=0"), "{log}");
    }
}

#[test]
fn csv_report_starts_with_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(dir.path(), &["reproduce-examples", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config={\"command\":\"reproduce-examples\""));
    assert_eq!(lines.next().unwrap(), "id,paper_value,oracle_value,abs_diff,asserted");
    assert_eq!(lines.count(), 4);
}

#[test]
fn rejected_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let unknown = config(dir.path(), "unknown.json", r#"{"n_pathz": 10}"#);
    let bad_value = config(dir.path(), "bad.json", r#"{"n_paths": 5}"#);
    let bad_pair = config(dir.path(), "pair.json", r#"{"pair": "nope", "n_paths": 200}"#);
    let not_json = config(dir.path(), "broken.json", "{");
    for args in [
        vec!["run-mc", "--config", &unknown, "--out", out],
        vec!["run-mc", "--config", &bad_value, "--out", out],
        vec!["run-mc", "--config", &bad_pair, "--out", out],
        vec!["run-mc", "--config", &not_json, "--out", out],
        vec!["check-exact", "--seed", "3", "--out", out],
        vec!["no-such-command"],
        vec!["check-exact", "--format", "xml", "--out", out],
    ] {
        let o = run(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn run_errors_map_to_exit_one_and_config_errors_to_two() {
    use duality_lab::cli::{exit_code, EXIT_CHECK_FAILED, EXIT_CONFIG};
    use duality_lab::Error;
    assert_eq!(exit_code(&Error::Numerical("nan".into())), EXIT_CHECK_FAILED);
    assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_CHECK_FAILED);
    assert_eq!(exit_code(&Error::Config("k".into())), EXIT_CONFIG);
    assert_eq!(exit_code(&Error::InvalidParameter("dt".into())), EXIT_CONFIG);
}

#[test]
fn seed_flag_changes_mc_output_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "mc.json", r#"{"pair": "wf-kingman", "n_paths": 1000, "dt": 0.01}"#);
    let read = |seed: &str| {
        let out = dir.path().join("o");
        let o = run(dir.path(), &["run-mc", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        fs::read(out.join("report.csv")).unwrap()
    };
    let a = read("5");
    assert_eq!(a, read("5"));
    assert_ne!(a, read("6"));
}
