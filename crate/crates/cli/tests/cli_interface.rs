//! End-to-end tests of the `ppct` binary: exit codes, file outputs, and
//! byte-level reproducibility from the emitted manifest.

use std::path::Path;
use std::process::{Command, Output};

fn ppct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppct"))
        .args(args)
        .output()
        .expect("spawn ppct")
}

#[test]
fn usage_errors_exit_with_code_2() {
    assert_eq!(ppct(&[]).status.code(), Some(2));
    assert_eq!(ppct(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ppct(&["run"]).status.code(), Some(2));
    assert_eq!(
        ppct(&["convergence", "--grids", "64"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ppct(&["convergence", "--problem", "rotor", "--grids", "8,16"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_config_exits_with_code_2_and_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "problem = orszag-tang\nnx = 8\nny = 8\nq = 2\n").unwrap();
    let out = ppct(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
}

#[test]
fn missing_config_file_is_a_runtime_error() {
    let out = ppct(&["run", "--config", "/nonexistent/nowhere.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

fn write_run_config(dir: &Path, out_dir: &Path, extra: &str) -> std::path::PathBuf {
    let cfg = dir.join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "problem = orszag-tang\nnx = 12\nny = 12\nt_end = 0.1\n{extra}out_dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn run_emits_snapshots_diagnostics_and_a_reproducing_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let cfg = write_run_config(dir.path(), &out_a, "snapshots = 0.05\n");
    let out = ppct(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // t = 0.05 and the final time
    assert!(out_a.join("snapshot_000.dat").exists());
    assert!(out_a.join("snapshot_001.dat").exists());
    assert!(!out_a.join("snapshot_002.dat").exists());
    let diag = std::fs::read_to_string(out_a.join("diagnostics.dat")).unwrap();
    assert!(diag.lines().count() > 2);
    // t column is strictly increasing
    let times: Vec<f64> = diag
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));

    // rerunning from the emitted manifest (same out_dir) reproduces
    // snapshots and diagnostics byte for byte
    let manifest = out_a.join("manifest.cfg");
    assert!(manifest.exists());
    let snap_a = std::fs::read(out_a.join("snapshot_001.dat")).unwrap();
    let diag_a = std::fs::read(out_a.join("diagnostics.dat")).unwrap();
    let rerun = ppct(&["run", "--config", manifest.to_str().unwrap()]);
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(
        snap_a,
        std::fs::read(out_a.join("snapshot_001.dat")).unwrap()
    );
    assert_eq!(
        diag_a,
        std::fs::read(out_a.join("diagnostics.dat")).unwrap()
    );
}

#[test]
fn zero_t_end_emits_the_initial_snapshot_only() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("z");
    let cfg = dir.path().join("zero.cfg");
    std::fs::write(
        &cfg,
        format!(
            "problem = blast\nnx = 8\nny = 8\nt_end = 0\nout_dir = {}\n",
            out_dir.display()
        ),
    )
    .unwrap();
    let out = ppct(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("snapshot_000.dat").exists());
    assert!(!out_dir.join("snapshot_001.dat").exists());
    let diag = std::fs::read_to_string(out_dir.join("diagnostics.dat")).unwrap();
    assert_eq!(diag.lines().count(), 1, "header only");
}

#[test]
fn convergence_prints_an_order_table() {
    let out = ppct(&[
        "convergence",
        "--problem",
        "vortex",
        "--grids",
        "8,16",
        "--q",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("# field B") && text.contains("# field v"),
        "{text}"
    );
    // one order entry per refinement
    assert_eq!(
        text.lines()
            .filter(|l| l.trim_start().starts_with("16"))
            .count(),
        2
    );
}

#[test]
fn check_succeeds() {
    let out = ppct(&["check"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("PASS").count(), 10);
}
