use std::process::{Command, Output};

use serde_json::Value;

fn rdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdp"))
        .args(args)
        .env_remove("RDP_WORKERS")
        .output()
        .expect("run rdp")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn curves_table_shape() {
    let csv = stdout(&rdp(&["curves", "--source", "paper-mixed", "--d-grid", "0:0.5:0.05", "--s-grid", "0:1:0.25"]));
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "D,S,rd_term,perception_term,R_theorem,R_paper,flagged");
    assert_eq!(lines.count(), 55);
    assert!(!csv.contains('\r'));
    let mut d: Vec<f64> = column(&csv, "D").iter().map(|v| v.parse().unwrap()).collect();
    d.dedup();
    assert_eq!(d.len(), 11);
    assert_eq!(d.last(), Some(&0.5));
}

#[test]
fn non_canonical_source_leaves_paper_column_blank() {
    let csv = stdout(&rdp(&["curves", "--source", "bernoulli:0.3", "--d-grid", "0:0.2:0.1", "--s-grid", "0:1:0.5"]));
    assert!(column(&csv, "R_paper").iter().all(String::is_empty));
    assert!(column(&csv, "R_theorem").iter().all(|v| !v.is_empty()));
}

#[test]
fn spectrum_is_nonincreasing() {
    let csv = stdout(&rdp(&["spectrum", "--source", "paper-mixed", "--n", "10000", "--r-grid", "0.6:1.1:0.01"]));
    let f: Vec<f64> = column(&csv, "F_exact").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(f.len(), 51);
    assert!(f.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn oracle_reports_the_known_point() {
    let csv = stdout(&rdp(&["oracle", "--source", "bernoulli:0.5", "--n", "2", "--m", "2"]));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().any(|r| r[0] == "2"
        && (r[1].parse::<f64>().unwrap() - 0.25).abs() < 1e-12
        && (r[2].parse::<f64>().unwrap() - 0.5).abs() < 1e-12));
}

#[test]
fn exit_codes() {
    assert_eq!(rdp(&["curves", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(rdp(&["nonsense"]).status.code(), Some(2));
    assert_eq!(rdp(&["curves", "--d-grid", "0:0.5"]).status.code(), Some(2));
    assert_eq!(rdp(&["curves", "--source", "bernoulli:1.5"]).status.code(), Some(2));
    assert_eq!(rdp(&["simulate", "--n", "8", "--m", "4", "--rate", "0.5"]).status.code(), Some(2));
    // Valid arguments that exceed a resource cap are a runtime failure.
    assert_eq!(rdp(&["oracle", "--n", "5", "--m", "2"]).status.code(), Some(1));
    assert_eq!(
        rdp(&["simulate", "--n", "30", "--m", "4", "--lossy-method", "greedy-cover"]).status.code(),
        Some(1)
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "# sweep\nsource = bernoulli:0.5\nd-grid = 0:0.5:0.25\ns-grid = 0:1:1\n").unwrap();
    let cfg = config.to_str().unwrap();
    let from_file = stdout(&rdp(&["curves", "--config", cfg]));
    assert_eq!(from_file.lines().count(), 1 + 3 * 2);
    let overridden = stdout(&rdp(&["curves", "--config", cfg, "--s-grid", "0:1:0.5"]));
    assert_eq!(overridden.lines().count(), 1 + 3 * 3);

    std::fs::write(&config, "colour = blue\n").unwrap();
    assert_eq!(rdp(&["curves", "--config", cfg]).status.code(), Some(2));
}

#[test]
fn metadata_record_echoes_effective_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let out_str = out.to_str().unwrap();
    let status = rdp(&["simulate", "--n", "8", "--rate", "0.5", "--seed", "3", "--out", out_str, "--emit-plot-script"]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let meta = std::fs::read_to_string(format!("{out_str}.meta.jsonl")).unwrap();
    assert_eq!(meta.lines().count(), 1);
    let record: Value = serde_json::from_str(meta.trim_end()).unwrap();
    assert_eq!(record["subcommand"], "simulate");
    assert_eq!(record["rows"], 1);
    let config = &record["config"];
    for (key, value) in [("source", "paper-mixed"), ("seed", "3"), ("samples", "10000"), ("exact-cap", "20"), ("workers", "1")] {
        assert_eq!(config[key], value, "{key}");
    }
    assert!(dir.path().join("sim.csv.plot.py").exists());

    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(column(&csv, "M"), ["16"]);
    assert_eq!(column(&csv, "distortion_exact"), ["true"]);
}

#[test]
fn side_outputs_land_next_to_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("spec.csv");
    let base = base.to_str().unwrap();
    stdout(&rdp(&["spectrum", "--n", "50,500", "--r-grid", "0.7:1.05:0.05", "--out", base]));
    let side = std::fs::read_to_string(format!("{base}.asymptotic.csv")).unwrap();
    assert_eq!(side.lines().next(), Some("R,F_asymptotic"));
    assert_eq!(side.lines().count(), 1 + 8);

    let base = dir.path().join("oracle.csv");
    let base = base.to_str().unwrap();
    stdout(&rdp(&["oracle", "--n", "2", "--m", "3", "--out", base]));
    let frontier = std::fs::read_to_string(base).unwrap();
    let witnesses = std::fs::read_to_string(format!("{base}.witness.txt")).unwrap();
    assert_eq!(frontier.lines().count() - 1, witnesses.lines().count());
}

#[test]
fn simulate_rows_are_reproducible() {
    let args = ["simulate", "--n", "24", "--m", "32", "--samples", "4000", "--seed", "9", "--workers", "3"];
    assert_eq!(stdout(&rdp(&args)), stdout(&rdp(&args)));
}
