//! Single runs: engine dispatch and CSV emission.

use std::fmt::Write as _;

use driven_lindblad::master::{analytic_interaction_trajectory, evolve, lamb_shift_ab_test, to_schroedinger, Environment};
use driven_lindblad::propagators::propagate_closed;
use driven_lindblad::qubit::{observables, DensityMatrix2, Observables};
use driven_lindblad::validity::full_report;
use driven_lindblad::VERSION;
use driven_lindblad_tn::tn_run;

use crate::config::{ConfigError, Engine, RawConfig, RunConfig};

/// Failure of a command, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Config(String),
    Solver(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Solver(_) => 2,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Solver(m) => write!(f, "solver abort: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

fn solver(e: impl std::fmt::Display) -> RunError {
    RunError::Solver(e.to_string())
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub obs: Observables<f64>,
    /// `(max_bond, discarded_weight)` for tensor-network runs.
    pub tn: Option<(usize, f64)>,
    /// `⟨σ_x⟩` with minus without the Lamb shift, for paired runs.
    pub sx_shift: Option<f64>,
    /// First row past the recurrence guard.
    pub past_recurrence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
    /// Validity flags as `key = value` pairs.
    pub validity: Vec<(&'static str, String)>,
}

impl RunOutput {
    pub fn max_excited_population(&self) -> f64 {
        self.rows.iter().map(|r| r.obs.excited_population).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoidal time average of the coherence.
    pub fn mean_coherence(&self) -> f64 {
        let r = &self.rows;
        if r.len() < 2 {
            return r.first().map_or(f64::NAN, |x| x.obs.coherence);
        }
        let area: f64 = r.windows(2).map(|w| 0.5 * (w[0].obs.coherence + w[1].obs.coherence) * (w[1].t - w[0].t)).sum();
        area / (r[r.len() - 1].t - r[0].t)
    }

    pub fn final_purity(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.obs.purity)
    }
}

fn rows_plain(samples: impl Iterator<Item = (f64, Observables<f64>)>) -> Vec<Row> {
    samples.map(|(t, obs)| Row { t, obs, tn: None, sx_shift: None, past_recurrence: false }).collect()
}

/// Runs the configured engine.
pub fn simulate(rc: &RunConfig) -> Result<RunOutput, RunError> {
    let p = rc.drive()?;
    let b = rc.bath()?;
    let mut warnings = Vec::new();
    let validity = full_report(&p, &b, &rc.quad).map_err(solver)?;
    if !validity.passes() && rc.engine != Engine::Unitary {
        warnings.push("validity checks fail; the master equation is outside its regime".to_string());
    }
    let rho0 = rc.initial_state().prepare(&p).map_err(|e| RunError::Config(format!("initial_state: {e}")))?;
    let rows = match rc.engine {
        Engine::Unitary => {
            warnings.push(format!("engine unitary ignores the bath keys (a = {})", rc.coupling));
            let env = Environment::new(&p, b, &rc.quad).map_err(solver)?;
            let tr = evolve(&rho0, &p, &env, &rc.evolution()).map_err(solver)?;
            rows_plain(tr.samples.iter().map(|s| (s.t, s.observables)))
        }
        Engine::Tdme if rc.lamb_shift_paired => {
            let env = Environment::new(&p, b, &rc.quad).map_err(solver)?;
            let cmp = lamb_shift_ab_test(&rho0, &p, &env, &rc.evolution()).map_err(solver)?;
            cmp.with_shift
                .samples
                .iter()
                .zip(&cmp.sx_shift)
                .map(|(s, d)| Row { t: s.t, obs: s.observables, tn: None, sx_shift: Some(*d), past_recurrence: false })
                .collect()
        }
        Engine::Tdme | Engine::Adme => {
            let env = Environment::new(&p, b, &rc.quad).map_err(solver)?;
            let tr = evolve(&rho0, &p, &env, &rc.evolution()).map_err(solver)?;
            rows_plain(tr.samples.iter().map(|s| (s.t, s.observables)))
        }
        Engine::Analytic => {
            let env = Environment::new(&p, b, &rc.quad).map_err(solver)?;
            let m = rho0.matrix();
            let c_z = (m.m[0][0] - m.m[1][1]).re;
            let c_plus = m.m[1][0] * 2.0;
            let traj = analytic_interaction_trajectory(c_z, c_plus, &p, &env, rc.t_end, rc.dt, rc.store_stride, rc.lamb_shift)
                .map_err(solver)?;
            let u = propagate_closed(&p, rc.t_end, rc.dt, rc.store_stride).map_err(solver)?;
            let mut rows = Vec::with_capacity(traj.len());
            for (c, u) in traj.iter().zip(&u) {
                let tilde = c.to_state().map_err(solver)?;
                let rho = DensityMatrix2::new(to_schroedinger(tilde.matrix(), u)).map_err(solver)?;
                rows.push(Row { t: c.t, obs: observables(&rho, c.t, &p), tn: None, sx_shift: None, past_recurrence: false });
            }
            rows
        }
        Engine::Tn => {
            let tr = tn_run(&rho0, &p, &b, &rc.tn()).map_err(|e| match e {
                driven_lindblad_tn::Error::InvalidParameter { .. } => RunError::Config(e.to_string()),
                _ => solver(e),
            })?;
            warnings.extend(tr.warnings.iter().cloned());
            let mut flagged = false;
            tr.samples
                .iter()
                .map(|s| {
                    let first = s.beyond_recurrence && !flagged;
                    flagged |= s.beyond_recurrence;
                    Row {
                        t: s.t,
                        obs: s.observables,
                        tn: Some((s.max_bond, s.discarded_weight)),
                        sx_shift: None,
                        past_recurrence: first,
                    }
                })
                .collect()
        }
    };
    Ok(RunOutput { rows, warnings, validity: validity.to_key_values() })
}

/// Header comment lines, the column line and the data rows.
pub fn render_csv(raw: &RawConfig, rc: &RunConfig, out: &RunOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# driven-lindblad {VERSION}");
    let _ = writeln!(s, "# units: energies in omega0, times in t_s = 1/omega0");
    for (k, v) in raw.entries() {
        let _ = writeln!(s, "# config {k} = {v}");
    }
    for (k, v) in &out.validity {
        let _ = writeln!(s, "# validity {k} = {v}");
    }
    for w in &out.warnings {
        let _ = writeln!(s, "# warning: {w}");
    }
    let mut cols = String::from("t,P_e,coherence,sx,sy,sz,purity");
    if rc.engine == Engine::Tn {
        cols.push_str(",max_bond,discarded_weight");
    }
    if out.rows.iter().any(|r| r.sx_shift.is_some()) {
        cols.push_str(",sx_shift");
    }
    let _ = writeln!(s, "{cols}");
    for r in &out.rows {
        if r.past_recurrence {
            let _ = writeln!(s, "# warning: rows below lie past the recurrence guard");
        }
        let o = &r.obs;
        let _ = write!(
            s,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.t, o.excited_population, o.coherence, o.sx, o.sy, o.sz, o.purity
        );
        if let Some((bond, w)) = r.tn {
            let _ = write!(s, ",{bond},{w:.12e}");
        }
        if let Some(d) = r.sx_shift {
            let _ = write!(s, ",{d:.12e}");
        }
        s.push('\n');
    }
    s
}

/// Validity report as `key = value` lines and its pass flag.
pub fn check_validity(raw: &RawConfig, rc: &RunConfig) -> Result<(String, bool), RunError> {
    let p = rc.drive()?;
    let b = rc.bath()?;
    let report = full_report(&p, &b, &rc.quad).map_err(solver)?;
    let mut s = String::new();
    let _ = writeln!(s, "# driven-lindblad {VERSION}");
    for (k, v) in raw.entries() {
        let _ = writeln!(s, "# config {k} = {v}");
    }
    for (k, v) in report.to_key_values() {
        let _ = writeln!(s, "{k} = {v}");
    }
    Ok((s, report.passes()))
}
