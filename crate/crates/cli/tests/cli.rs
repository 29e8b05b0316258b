use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_driven-lindblad")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("driven-lindblad-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SHORT: [&str; 4] = ["--set", "t_end_over_ts=0.5", "--set", "store_stride=50"];

#[test]
fn simulate_is_deterministic_and_well_formed() {
    let mut args = vec!["simulate"];
    args.extend(SHORT);
    let (a, b) = (bin(&args), bin(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# driven-lindblad "));
    assert!(text.contains("# config engine = tdme"));
    assert!(text.contains("# validity "));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "t,P_e,coherence,sx,sy,sz,purity");
    assert_eq!(data.len(), 1 + 11);
    for row in &data[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 7);
        assert!(cells.iter().all(|c| c.contains('e') && c.parse::<f64>().is_ok()), "{row}");
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = scratch("out");
    let path = dir.join("run.csv");
    let mut args = vec!["simulate", "--engine", "adme", "--out", path.to_str().unwrap()];
    args.extend(SHORT);
    assert_eq!(bin(&args).status.code(), Some(0));
    let mut args = vec!["simulate", "--engine", "adme"];
    args.extend(SHORT);
    assert_eq!(std::fs::read(&path).unwrap(), bin(&args).stdout);
}

#[test]
fn config_file_and_overrides() {
    let dir = scratch("config");
    let path = dir.join("run.conf");
    std::fs::write(&path, "# comment\nengine = unitary\nt_end_over_ts = 0.2\n").unwrap();
    let out = bin(&["simulate", "--config", path.to_str().unwrap(), "--set", "store_stride=100"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# config engine = unitary"));
    assert!(text.contains("# config store_stride = 100"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    std::fs::write(&path, "no_such_key = 1\n").unwrap();
    assert_eq!(bin(&["simulate", "--config", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    assert_eq!(bin(&["simulate", "--set", "a=-1"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--engine", "analytic"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--engine", "nope"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--set", "picture"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "--config", "/nonexistent/run.conf"]).status.code(), Some(1));
}

#[test]
fn analytic_engine_in_interaction_picture() {
    let mut args = vec!["simulate", "--engine", "analytic", "--set", "picture=interaction"];
    args.extend(SHORT);
    assert_eq!(bin(&args).status.code(), Some(0));
}

#[test]
fn check_validity_exit_codes() {
    let ok = bin(&["check-validity"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().contains(" = "));
    assert_eq!(bin(&["check-validity", "--set", "a=0.5"]).status.code(), Some(3));
}

#[test]
fn sweep_writes_runs_and_summary() {
    let dir = scratch("sweep");
    let d = dir.to_str().unwrap();
    let mut args = vec!["sweep", "--out", d, "--set", "sweep_key=lambda_Omega", "--set", "sweep_values=0.5, 1, 2", "--set", "workers=2"];
    args.extend(SHORT);
    let out = bin(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "lambda_Omega,max_P_e,mean_coherence,final_purity,status");
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));
    let runs = std::fs::read_dir(&dir).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("run_")).count();
    assert_eq!(runs, 3);
}

#[test]
fn sweep_records_failures_and_rejects_empty_lists() {
    let dir = scratch("sweep-fail");
    let d = dir.to_str().unwrap();
    let mut args = vec!["sweep", "--out", d, "--set", "sweep_key=a", "--set", "sweep_values=5e-3,-1"];
    args.extend(SHORT);
    assert_eq!(bin(&args).status.code(), Some(2));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.lines().any(|l| l.contains("NaN") && l.contains("config error")));
    assert!(summary.lines().any(|l| l.ends_with(",ok")));
    assert_eq!(bin(&["sweep", "--out", d, "--set", "sweep_key=a", "--set", "sweep_values="]).status.code(), Some(1));
}

#[test]
fn tn_engine_adds_bond_columns() {
    let out = bin(&[
        "simulate", "--engine", "tn", "--set", "TB_over_omega0=0.5", "--set", "dt_over_ts=1e-2", "--set", "t_end_over_ts=0.2",
        "--set", "store_stride=10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "t,P_e,coherence,sx,sy,sz,purity,max_bond,discarded_weight");
    assert_eq!(data.len(), 1 + 3);
    assert_eq!(bin(&["simulate", "--engine", "tn", "--set", "dt_over_ts=0.5"]).status.code(), Some(1));
}
