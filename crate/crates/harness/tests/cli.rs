use std::path::Path;
use std::process::Command;

use relpos_harness::cli;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("relpos").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_run_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.log");
    let truth = dir.path().join("truth.csv");
    let timeline = dir.path().join("estimates.csv");
    let errors = dir.path().join("errors.csv");
    let plot = dir.path().join("errors.dat");

    let (code, _, err) = run(&["simulate", "--log", s(&log), "--truth", s(&truth), "--duration", "60", "--n_users", "3"]);
    assert_eq!(code, 0, "{err}");
    assert!(std::fs::read_to_string(dir.path().join("run.log.meta")).unwrap().contains("config_hash="));

    let (code, out, err) = run(&[
        "run", "--log", s(&log), "--out", s(&timeline), "--truth", s(&truth), "--particles", "100",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("mean_rmse="));
    let meta = std::fs::read_to_string(dir.path().join("estimates.csv.meta")).unwrap();
    assert!(meta.contains("seed=0") && meta.contains("config.particles=100"));

    let (code, out, err) = run(&[
        "eval", "--timeline", s(&timeline), "--truth", s(&truth), "--out", s(&errors), "--gnuplot", s(&plot),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("rows="));
    assert!(std::fs::read_to_string(&errors).unwrap().starts_with("t,rmse\n"));
    assert!(std::fs::read_to_string(&plot).unwrap().starts_with("# t rmse\n"));
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sweep.csv");
    let (code, _, err) = run(&[
        "sweep", "--axis", "alpha", "--values", "0,0.01", "--seeds", "2", "--duration", "30",
        "--particles", "50", "--serial", "--out", s(&table),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("alpha,seeds,mean_rmse"));
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    assert_eq!(run(&[]).0, 1);
    assert_eq!(run(&["launch"]).0, 1);
    assert_eq!(run(&["simulate", "--log", "x"]).0, 1);
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("l");
    let truth = dir.path().join("t");
    assert_eq!(run(&["simulate", "--log", s(&log), "--truth", s(&truth), "--alpha", "2"]).0, 1);
    assert_eq!(run(&["simulate", "--log", s(&log), "--truth", s(&truth), "--speed", "fast"]).0, 1);
    assert_eq!(run(&["sweep", "--axis", "colour", "--values", "1", "--out", s(&log)]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.log");
    std::fs::write(&bad, "# relpos event log v1\nprior,0,0,0,0\n1.000,imu,0,1,0,0\n0.500,imu,0,1,0,0\n").unwrap();
    let out = dir.path().join("o.csv");
    let (code, _, err) = run(&["run", "--log", s(&bad), "--out", s(&out)]);
    assert_eq!(code, 2);
    assert!(err.contains("bad.log:4:"), "{err}");
    let (code, _, _) = run(&["run", "--log", s(&dir.path().join("missing.log")), "--out", s(&out)]);
    assert_eq!(code, 2);
}

#[test]
fn binary_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_relpos");
    assert_eq!(Command::new(exe).arg("bogus").output().unwrap().status.code(), Some(1));
    assert_eq!(Command::new(exe).arg("--version").output().unwrap().status.code(), Some(1));
    assert_eq!(Command::new(exe).arg("--help").output().unwrap().status.code(), Some(0));
}
