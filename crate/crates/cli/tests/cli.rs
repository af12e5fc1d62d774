//! End-to-end behaviour of the `sfbm` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sfbm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfbm"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("SEED")
        .output()
        .expect("binary runs")
}

fn body(dir: &Path) -> String {
    let text = fs::read_to_string(dir.join("report.txt")).unwrap();
    text.split("\n[timing]").next().unwrap().to_string()
}

#[test]
fn invalid_hurst_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfbm(dir.path(), &["simulate", "--hurst", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("H ∈ (1/2, 1)"), "{err}");
}

#[test]
fn config_errors_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "[fbm]\nhurst = 0.7\nn_steps = 256\nhurst = 0.8\n").unwrap();
    let out = sfbm(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn moments_beyond_threshold_are_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfbm(
        dir.path(),
        &[
            "neg-moments",
            "--n-paths",
            "200",
            "--n-steps",
            "256",
            "--set",
            "neg_moments.pairs=1:0.9",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = body(dir.path());
    assert!(report.contains("status = not_applicable"), "{report}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("1 not applicable"));
}

#[test]
fn failed_claim_exits_one_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    // the power drift with alpha = 2 violates the growth condition
    let out = sfbm(
        dir.path(),
        &[
            "verify-bound",
            "--drift",
            "power",
            "--set",
            "drift.alpha_d=2",
            "--n-paths",
            "20",
            "--n-steps",
            "256",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(body(dir.path()).contains("[claim.assumptions_hold]"));
}

#[test]
fn same_config_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--n-paths",
        "50",
        "--n-steps",
        "256",
        "--seed",
        "11",
        "--csv",
        "per_path",
    ];
    // the echoed output_dir differs, so compare the remainder
    let strip = |s: String, d: &Path| s.replace(d.to_str().unwrap(), "<dir>");
    assert_eq!(sfbm(a.path(), &args).status.code(), Some(0));
    assert_eq!(
        sfbm(b.path(), &[&args[..], &["--threads", "1"]].concat())
            .status
            .code(),
        Some(0)
    );
    assert_eq!(strip(body(a.path()), a.path()), strip(body(b.path()), b.path()));
    for i in 0..10 {
        let name = format!("path_{i:04}.csv");
        let x = fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(&name)).unwrap());
        assert!(x.starts_with(b"time,value\n"));
    }
}

#[test]
fn seed_flag_beats_environment_and_environment_beats_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "seed = 3\n[fbm]\nn_steps = 64\n").unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfbm"));
        cmd.args(["moments", "--n-paths", "8", "--csv", "none", "--config"])
            .arg(&cfg)
            .arg("--output-dir")
            .arg(dir.path())
            .env_remove("SEED");
        if let Some(s) = env {
            cmd.env("SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        body(dir.path())
    };
    assert!(run(None, None).contains("run.seed = 3\n"));
    assert!(run(Some("5"), None).contains("run.seed = 5\n"));
    assert!(run(Some("5"), Some("7")).contains("run.seed = 7\n"));
}

#[test]
fn report_is_rerunnable_from_its_echo() {
    let dir = tempfile::tempdir().unwrap();
    assert!(sfbm(dir.path(), &["cir", "--n-paths", "20", "--n-steps", "200"])
        .status
        .success());
    let first = body(dir.path());
    let echo = dir.path().join("echo.cfg");
    let cfg = sfbm_cli::report::config_from_report(&first).unwrap();
    fs::write(&echo, cfg.to_document()).unwrap();
    assert!(sfbm(dir.path(), &["cir", "--config", echo.to_str().unwrap()])
        .status
        .success());
    assert_eq!(body(dir.path()), first);
}

#[test]
fn help_lists_key_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_sfbm"))
        .arg("--help")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("fbm.hurst = 0.75") && text.contains("neg-moments"),
        "{text}"
    );
}
