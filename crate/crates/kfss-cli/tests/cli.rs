//! Exit-code and output-format behavior of the command-line interface.

use std::path::Path;
use std::process::Command;

struct CliRun {
    stdout: String,
    stderr: String,
    code: i32,
}

fn kfss_cli(args: &[&str], dir: &Path) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_kfss"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn kfss");
    CliRun {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().expect("exit code"),
    }
}

fn field<'a>(run: &'a CliRun, key: &str) -> &'a str {
    run.stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("missing field {key:?} in output:\n{}", run.stdout))
}

fn gen_example1(dir: &Path) {
    let run = kfss_cli(
        &["gen", "--family", "example1", "--lambda1", "0.5", "--h", "10",
          "--out", "ex1.json"],
        dir,
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
}

#[test]
fn solve_empty_mask_gives_unobserved_trace() {
    let dir = tempfile::tempdir().unwrap();
    gen_example1(dir.path());
    let run = kfss_cli(&["solve", "--instance", "ex1.json", "--mask", "000"], dir.path());
    assert_eq!(run.code, 0);
    let trace: f64 = field(&run, "trace").parse().unwrap();
    assert!((trace - (4.0 / 3.0 + 2.0)).abs() < 1e-9);
    let diag: Vec<f64> = field(&run, "diag")
        .split(' ')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(diag.len(), 3);
    assert!((diag[0] - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn solve_rejects_wrong_mask_length() {
    let dir = tempfile::tempdir().unwrap();
    gen_example1(dir.path());
    let run = kfss_cli(&["solve", "--instance", "ex1.json", "--mask", "10"], dir.path());
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("mask"), "{}", run.stderr);
}

#[test]
fn solve_rejects_missing_and_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(&["solve", "--instance", "nope.json", "--mask", "1"], dir.path());
    assert_eq!(run.code, 1);

    std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    let run = kfss_cli(&["solve", "--instance", "bad.json", "--mask", "1"], dir.path());
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("parse"), "{}", run.stderr);
}

#[test]
fn unknown_arguments_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(&["solve", "--nonsense"], dir.path());
    assert_eq!(run.code, 1);
    let run = kfss_cli(&["--help"], dir.path());
    assert_eq!(run.code, 0);
    assert!(run.stdout.contains("Exit codes"));
}

#[test]
fn exhaustive_with_zero_budget_selects_nothing() {
    let dir = tempfile::tempdir().unwrap();
    gen_example1(dir.path());
    let run = kfss_cli(&["exhaustive", "--instance", "ex1.json", "--budget", "0"], dir.path());
    assert_eq!(run.code, 0);
    assert_eq!(field(&run, "mask"), "000");
}

#[test]
fn greedy_budget_beyond_catalog_fails() {
    let dir = tempfile::tempdir().unwrap();
    gen_example1(dir.path());
    let run = kfss_cli(&["greedy", "--instance", "ex1.json", "--budget", "5"], dir.path());
    assert_eq!(run.code, 1);
}

#[test]
fn gen_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(
        &["gen", "--family", "example1", "--lambda1", "1.5", "--h", "10", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(run.code, 1);
    assert!(!dir.path().join("x.json").exists());

    let run = kfss_cli(
        &["gen", "--family", "theorem1", "--m", "2", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("collection"), "{}", run.stderr);

    let run = kfss_cli(
        &["gen", "--family", "theorem1", "--m", "2", "--collection", "1,2", "--out", "x.json"],
        dir.path(),
    );
    assert_eq!(run.code, 1);
}

#[test]
fn gen_reads_collection_from_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cover.txt"), "1,2,3\n4,5,6\n").unwrap();
    let run = kfss_cli(
        &["gen", "--family", "theorem1", "--m", "2", "--collection-file", "cover.txt",
          "--out", "t1.json"],
        dir.path(),
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(field(&run, "n"), "7");
    assert_eq!(field(&run, "q"), "3");
    let run = kfss_cli(&["exhaustive", "--instance", "t1.json", "--budget", "3"], dir.path());
    let trace: f64 = field(&run, "trace").parse().unwrap();
    assert!((trace - 7.0).abs() < 1e-6);
}

#[test]
fn sweep_ratio_rows_are_monotone_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(
        &["sweep-ratio", "--lambda1", "0.5", "--h", "1,10,100", "--out", "sweep.csv"],
        dir.path(),
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "lambda1,h,trace_greedy,trace_opt,ratio,ratio_limit"
    );
    let mut last_ratio = 0.0;
    let mut rows = 0;
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 6);
        let ratio = cells[4];
        assert!(ratio >= 1.0 - 1e-9);
        assert!(ratio >= last_ratio, "ratio not non-decreasing in h");
        assert!((cells[5] - 10.0 / 9.0).abs() < 1e-9);
        last_ratio = ratio;
        rows += 1;
    }
    assert_eq!(rows, 3);

    kfss_cli(
        &["sweep-ratio", "--lambda1", "0.5", "--h", "1,10,100", "--out", "sweep2.csv"],
        dir.path(),
    );
    assert_eq!(
        std::fs::read(dir.path().join("sweep.csv")).unwrap(),
        std::fs::read(dir.path().join("sweep2.csv")).unwrap(),
        "CSV output is not byte-deterministic"
    );
}

#[test]
fn sweep_ratio_empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(&["sweep-ratio", "--out", "empty.csv"], dir.path());
    assert_eq!(run.code, 0);
    let text = std::fs::read_to_string(dir.path().join("empty.csv")).unwrap();
    assert_eq!(text, "lambda1,h,trace_greedy,trace_opt,ratio,ratio_limit\n");
}

#[test]
fn verify_subcommand_passes() {
    let dir = tempfile::tempdir().unwrap();
    let run = kfss_cli(&["verify", "--seed", "7"], dir.path());
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert_eq!(run.stdout.matches(": PASS").count(), 4);
    assert!(run.stderr.contains("wall_time_ms"));
}
