use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scmaba::config::load_config;
use scmaba::harness::make_world;
use scmaba::{SimConfig, TaskId};

fn scmaba(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scmaba"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn empty_config_file_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    fs::write(&path, "").unwrap();
    let c = load_config(&path).unwrap();
    assert_eq!(c, SimConfig::default());
    assert_eq!(c.budget, 10_000.0);
}

#[test]
fn shipped_config_lists_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    assert_eq!(load_config(&path).unwrap(), SimConfig::default());
}

#[test]
fn imported_ground_truth_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.csv");
    fs::write(&gt, "task_id,round,value\n1,1,55.5\n3,2,12.25\n").unwrap();
    let config = SimConfig {
        ground_truth_path: Some(gt),
        ..SimConfig::default()
    };
    let world = make_world(&config, 4).unwrap();
    assert_eq!(world.ground_truth(TaskId(1), 1).value, 55.5);
    assert_eq!(world.ground_truth(TaskId(3), 2).value, 12.25);
    let drawn = make_world(&SimConfig::default(), 4).unwrap();
    assert_eq!(world.ground_truth(TaskId(2), 1), drawn.ground_truth(TaskId(2), 1));
}

#[test]
fn run_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = scmaba(&["run", "--reps", "2", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = dir.path();
    assert_eq!(
        header(&d.join("summary.csv")),
        "algorithm,seed,B,N,M,K,revenue,regret,rounds,spend,mae_b1,mae_b2,mae_b3,mae_b4"
    );
    assert_eq!(header(&d.join("trace.csv")), "round,phase,worker_id,recruited,bid,payment,budget_remaining");
    assert_eq!(
        header(&d.join("baseline_trace.csv")),
        "algorithm,round,phase,worker_id,recruited,bid,payment,budget_remaining"
    );
    assert_eq!(header(&d.join("verdicts.csv")), "round,worker_id,task_id,tier,reference,reported,accepted");
    assert_eq!(header(&d.join("profiles.csv")), "worker_id,round,pulls,sr_mean,ucb");
    let summary = fs::read_to_string(d.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 4);
    let baseline = fs::read_to_string(d.join("baseline_trace.csv")).unwrap();
    assert_eq!(baseline.lines().filter(|l| l.starts_with("algorithm")).count(), 1);
}

#[test]
fn run_respects_config_and_algorithm_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "budget = 3000\nworkers = 40\nwinners = 5\n").unwrap();
    let out = scmaba(
        &["run", "--config", cfg.to_str().unwrap(), "--reps", "1", "--algorithms", "SCMABA,Random"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("SCMABA,") && rows[0].contains(",3000,40,40,5,"));
    assert!(rows[1].starts_with("Random,"));
}

#[test]
fn sweep_writes_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = scmaba(&["sweep", "--param", "N", "--values", "40:60:20", "--reps", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("N_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 4);
    assert!(dir.path().join("N_sweep_plot.py").exists());
}

#[test]
fn invalid_sweep_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = scmaba(&["sweep", "--param", "K", "--values", "5,100"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("workers"));
    assert!(!dir.path().join("K_sweep.csv").exists());
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "eps1 = 3.0\neps2 = 2.0\n").unwrap();
    let out = scmaba(&["run", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("eps2"));
}

#[test]
fn probe_audit_and_identify_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["probe-truthfulness", "--reps", "2"][..],
        &["audit-ir", "--reps", "2"][..],
        &["identify", "--seed", "5"][..],
    ] {
        let out = scmaba(args, d);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(
        header(&d.join("truthfulness.csv")),
        "seed,round,worker_id,true_cost,critical_bid,claimed_cost,recruited,payment,utility"
    );
    assert_eq!(fs::read_to_string(d.join("truthfulness.csv")).unwrap().lines().count(), 1 + 2 * 2 * 50);
    assert_eq!(header(&d.join("ir_audit.csv")), "seed,round,phase,worker_id,cost,payment");
    assert_eq!(header(&d.join("identification.csv")), "worker_id,bucket,true_sr,estimated_sr,pulls");
}

#[test]
fn degenerate_budget_probe_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "budget = 5\n").unwrap();
    let out = scmaba(&["probe-truthfulness", "--config", cfg.to_str().unwrap(), "--reps", "1"], dir.path());
    assert!(!out.status.success());
}
