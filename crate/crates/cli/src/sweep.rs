//! Parameter sweeps on a bounded worker pool.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{RawConfig, NUMERIC_KEYS};
use crate::run::{render_csv, simulate, RunError, RunOutput};
use driven_lindblad::VERSION;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub key: String,
    /// Values as written, so file names and summaries echo the input.
    pub values: Vec<String>,
    pub workers: usize,
}

impl SweepPlan {
    pub fn from_config(raw: &RawConfig) -> Result<Self, RunError> {
        let key = raw.get("sweep_key").to_string();
        if key.is_empty() {
            return Err(RunError::Config("sweep_key: required for sweep".into()));
        }
        if !NUMERIC_KEYS.contains(&key.as_str()) {
            return Err(RunError::Config(format!("sweep_key: `{key}` is not a numeric key")));
        }
        let values: Vec<String> =
            raw.get("sweep_values").split([',', ' ']).map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
        if values.is_empty() {
            return Err(RunError::Config("sweep_values: empty list".into()));
        }
        for v in &values {
            if v.parse::<f64>().is_err() {
                return Err(RunError::Config(format!("sweep_values: `{v}` is not a number")));
            }
        }
        let workers = raw.get("workers").parse().map_err(|_| RunError::Config("workers: not a non-negative integer".into()))?;
        Ok(Self { key, values, workers })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: String,
    pub file: PathBuf,
    pub result: Result<RunOutput, RunError>,
}

fn run_one(base: &RawConfig, key: &str, value: &str) -> (RawConfig, Result<RunOutput, RunError>) {
    let mut raw = base.clone();
    raw.set(key, value).expect("sweep key is known");
    let result = raw.resolve().map_err(RunError::from).and_then(|rc| simulate(&rc));
    (raw, result)
}

/// Executes every run, writing one CSV per successful value and
/// `summary.csv` into `dir`. Results keep the order of the values.
pub fn sweep(base: &RawConfig, plan: &SweepPlan, dir: &Path) -> Result<Vec<SweepRun>, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::Config(format!("--out {}: {e}", dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| RunError::Config(format!("workers: {e}")))?;
    let results: Vec<(RawConfig, Result<RunOutput, RunError>)> =
        pool.install(|| plan.values.par_iter().map(|v| run_one(base, &plan.key, v)).collect());
    let mut runs = Vec::with_capacity(results.len());
    for (i, (v, (raw, result))) in plan.values.iter().zip(results).enumerate() {
        let file = dir.join(format!("run_{i:03}_{}_{v}.csv", plan.key));
        if let Ok(out) = &result {
            let rc = raw.resolve().expect("resolved once already");
            std::fs::write(&file, render_csv(&raw, &rc, out)).map_err(|e| RunError::Solver(format!("{}: {e}", file.display())))?;
        }
        runs.push(SweepRun { value: v.clone(), file, result });
    }
    std::fs::write(dir.join("summary.csv"), render_summary(base, plan, &runs))
        .map_err(|e| RunError::Solver(format!("summary.csv: {e}")))?;
    Ok(runs)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn render_summary(base: &RawConfig, plan: &SweepPlan, runs: &[SweepRun]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# driven-lindblad {VERSION}");
    for (k, v) in base.entries() {
        let _ = writeln!(s, "# config {k} = {v}");
    }
    let _ = writeln!(s, "{},max_P_e,mean_coherence,final_purity,status", plan.key);
    for r in runs {
        let value: f64 = r.value.parse().expect("validated");
        match &r.result {
            Ok(out) => {
                let _ = writeln!(
                    s,
                    "{value:.12e},{:.12e},{:.12e},{:.12e},ok",
                    out.max_excited_population(),
                    out.mean_coherence(),
                    out.final_purity()
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{value:.12e},NaN,NaN,NaN,{}", quote(&e.to_string()));
            }
        }
    }
    s
}
