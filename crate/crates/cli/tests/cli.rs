//! End-to-end checks of the command-line surface: config validation, exit
//! codes, metadata stamping and worker-count independence.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sinai-lab"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"))
}

#[test]
fn malformed_config_exits_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\"seed\": 1, \"bogus\": true}").unwrap();
    let out = dir.path().join("results");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(!out.exists(), "no output files on validation failure");
}

#[test]
fn ellipticity_violation_is_cited() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        "{\"distribution\": {\"family\": \"two_point\", \"p\": 0.3, \"epsilon0\": 0.6}}",
    )
    .unwrap();
    let output = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("results"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("epsilon0 must lie in (0, 1/2)"), "{stderr}");
}

#[test]
fn minimal_invocation_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["simulate", "--steps", "500", "--seed", "7"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("walk.json").exists());
}

#[test]
fn seed_flag_overrides_file_and_lands_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"seed\": 1}").unwrap();
    let status = bin()
        .args(["rate-function", "--config"])
        .arg(&cfg)
        .args(["--seed", "123"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.path().join("rate_function.csv"));
    assert!(csv.starts_with("# sinai-lab"), "{csv}");
    assert!(csv.lines().next().unwrap().contains("seed=123"));
}

#[test]
fn unknown_sign_changes_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sign-changes", "--mode", "wiggle"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn bad_workers_env_var_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["rate-function", "--seed", "1"])
        .arg("--out")
        .arg(dir.path())
        .env("SINAI_LAB_WORKERS", "many")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn worker_count_does_not_change_output_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (label, workers) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out = dir.path().join(label);
        let status = bin()
            .args([
                "persistence",
                "--seed",
                "99",
                "--horizons",
                "100,1000",
                "--trials",
                "500",
                "--workers",
                workers,
            ])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        outputs.push((
            read(&out.join("persistence.csv")),
            read(&out.join("persistence_summary.json")),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "1 vs 2 workers");
    assert_eq!(outputs[0], outputs[2], "rerun identity");
}

#[test]
fn verify_formulas_emits_csv_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["verify-formulas", "--seed", "4", "--cases", "5", "--trials", "800"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(&dir.path().join("verify.csv"));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# sinai-lab"));
    assert_eq!(lines.next().unwrap(), "case,closed_form,mc_estimate,se,pass");
    assert!(csv.lines().skip(2).all(|l| l.ends_with(",true") || l.ends_with(",false")));
}
