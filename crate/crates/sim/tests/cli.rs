use std::process::Command;

use sapsr_sim::{load_metrics, CSV_HEADER};

fn sapsr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sapsr"))
}

#[test]
fn simulate_writes_csv_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(
        &config,
        "population = 400\ninitial_symptomatic = 4\ntests_per_day = 10\niterations = 10\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = sapsr()
        .args([
            "simulate", "--policy", "ppto", "--seed", "9", "--days", "6", "--config",
        ])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = out.join("ppto_seed0009.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = load_metrics(&csv).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.population() == 400));

    let log = std::fs::read_to_string(out.join("ppto_seed0009.log")).unwrap();
    assert_eq!(log.lines().count(), 6);
    assert!(log.lines().all(|l| l.starts_with("day=")));
}

#[test]
fn suite_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, "population = 300\ndays = 5\n").unwrap();
    let status = sapsr()
        .args([
            "suite",
            "--name",
            "uncontrolled",
            "--seeds",
            "3",
            "--config",
        ])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let suite = dir.path().join("uncontrolled");
    for seed in 1..=3 {
        assert!(suite.join(format!("none_seed{seed:04}.csv")).exists());
    }
    let summary = std::fs::read_to_string(suite.join("summary.csv")).unwrap();
    assert!(summary.starts_with("label,runs,cum_infections_mean,cum_infections_std\nnone,3,"));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = sapsr()
        .args(["simulate", "--policy", "magic", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());

    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "rho = 3.0\n").unwrap();
    let out = sapsr()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}
