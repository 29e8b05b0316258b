//! Flat `key = value` run configuration.
//!
//! All quantities are dimensionless: energies in units of `ω₀`, times in
//! units of `t_s = 1/ω₀`.

use std::fmt;

use driven_lindblad::master::{InitialState, Picture, Solver};
use driven_lindblad::{BathSpec, DriveParams, EvolutionConfig, QuadratureConfig};
use driven_lindblad_tn::{TnConfig, Truncation, DESK_SCALE_MODES};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Tdme,
    Adme,
    Unitary,
    Tn,
    Analytic,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Tdme => "tdme",
            Engine::Adme => "adme",
            Engine::Unitary => "unitary",
            Engine::Tn => "tn",
            Engine::Analytic => "analytic",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "tdme" => Ok(Engine::Tdme),
            "adme" => Ok(Engine::Adme),
            "unitary" => Ok(Engine::Unitary),
            "tn" => Ok(Engine::Tn),
            "analytic" => Ok(Engine::Analytic),
            _ => Err(err(format!("engine: unknown engine `{s}` (expected tdme, adme, unitary, tn or analytic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Thermal,
    Superposition,
    Ground,
    Excited,
    Mixed,
    Bloch,
}

impl InitialKind {
    fn name(self) -> &'static str {
        match self {
            InitialKind::Thermal => "thermal",
            InitialKind::Superposition => "superposition",
            InitialKind::Ground => "ground",
            InitialKind::Excited => "excited",
            InitialKind::Mixed => "mixed",
            InitialKind::Bloch => "bloch",
        }
    }
}

/// Every recognised key with its default, in header order.
pub const KEYS: &[(&str, &str)] = &[
    ("engine", "tdme"),
    ("lambda_Omega", "1"),
    ("lambda_omega", "10"),
    ("a", "5e-3"),
    ("wc_over_omega0", "2"),
    ("TB_over_omega0", "4"),
    ("TS_over_omega0", "1"),
    ("initial_state", "thermal"),
    ("bloch_x", "0"),
    ("bloch_y", "0"),
    ("bloch_z", "0"),
    ("t_end_over_ts", "10"),
    ("dt_over_ts", "1e-3"),
    ("store_stride", "10"),
    ("lamb_shift", "true"),
    ("picture", "schroedinger"),
    ("pv_epsilon", "0.5"),
    ("quad_rel_tol", "1e-10"),
    ("quad_max_panels", "2000"),
    ("tail_cutoff_factor", "40"),
    ("workers", "0"),
    ("tn_modes", "30"),
    ("tn_w_max_over_omega0", "10"),
    ("tn_occupancy_cutoff", "4"),
    ("tn_uniform_dim", "0"),
    ("tn_gibbs_tolerance", "2e-2"),
    ("tn_svd_cutoff", "1e-9"),
    ("tn_chi_max", "64"),
    ("tn_renormalization_limit", "1e-3"),
    ("tn_large_bath", "false"),
    ("sweep_key", ""),
    ("sweep_values", ""),
];

/// Keys a sweep may vary.
pub const NUMERIC_KEYS: &[&str] = &[
    "lambda_Omega",
    "lambda_omega",
    "a",
    "wc_over_omega0",
    "TB_over_omega0",
    "TS_over_omega0",
    "bloch_x",
    "bloch_y",
    "bloch_z",
    "t_end_over_ts",
    "dt_over_ts",
    "store_stride",
    "pv_epsilon",
    "quad_rel_tol",
    "quad_max_panels",
    "tail_cutoff_factor",
    "tn_modes",
    "tn_w_max_over_omega0",
    "tn_occupancy_cutoff",
    "tn_uniform_dim",
    "tn_gibbs_tolerance",
    "tn_svd_cutoff",
    "tn_chi_max",
    "tn_renormalization_limit",
];

/// Raw key-value pairs, one slot per entry of [`KEYS`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: Vec<String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|(_, v)| v.to_string()).collect() }
    }
}

fn index_of(key: &str) -> Option<usize> {
    KEYS.iter().position(|(k, _)| *k == key)
}

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = vec![false; KEYS.len()];
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            let idx = index_of(key).ok_or_else(|| err(format!("line {}: unknown key `{key}`", no + 1)))?;
            if seen[idx] {
                return Err(err(format!("line {}: duplicate key `{key}`", no + 1)));
            }
            seen[idx] = true;
            cfg.values[idx] = value.trim().to_string();
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let idx = index_of(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        self.values[idx] = value.trim().to_string();
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| err(format!("--set `{assignment}`: expected key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[index_of(key).expect("known key")]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> {
        KEYS.iter().map(|(k, _)| *k).zip(self.values.iter().map(String::as_str))
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.get(key);
        let x: f64 = v.parse().map_err(|_| err(format!("{key}: `{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(err(format!("{key}: must be finite")));
        }
        Ok(x)
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.get(key);
        v.parse().map_err(|_| err(format!("{key}: `{v}` is not a non-negative integer")))
    }

    fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.get(key) {
            "true" => Ok(true),
            "false" => Ok(false),
            v => Err(err(format!("{key}: `{v}` is not true or false"))),
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let engine = Engine::parse(self.get("engine"))?;
        let initial = match self.get("initial_state") {
            "thermal" => InitialKind::Thermal,
            "superposition" => InitialKind::Superposition,
            "ground" => InitialKind::Ground,
            "excited" => InitialKind::Excited,
            "mixed" => InitialKind::Mixed,
            "bloch" => InitialKind::Bloch,
            v => return Err(err(format!("initial_state: unknown state `{v}`"))),
        };
        if !matches!(self.get("lamb_shift"), "true" | "false" | "paired") {
            return Err(err(format!("lamb_shift: `{}` is not true, false or paired", self.get("lamb_shift"))));
        }
        let picture = match self.get("picture") {
            "schroedinger" => Picture::Schroedinger,
            "interaction" => Picture::Interaction,
            v => return Err(err(format!("picture: `{v}` is not schroedinger or interaction"))),
        };
        let field = |r: Result<f64, ConfigError>, key: &str, check: fn(f64) -> bool, why: &str| -> Result<f64, ConfigError> {
            let x = r?;
            if check(x) { Ok(x) } else { Err(err(format!("{key}: {why}"))) }
        };
        let pos = |x: f64| x > 0.0;
        let nonneg = |x: f64| x >= 0.0;
        let rc = RunConfig {
            engine,
            lambda_rabi: field(self.f64("lambda_Omega"), "lambda_Omega", nonneg, "must be non-negative")?,
            lambda_drive: field(self.f64("lambda_omega"), "lambda_omega", pos, "must be positive")?,
            coupling: field(self.f64("a"), "a", pos, "must be positive")?,
            cutoff: field(self.f64("wc_over_omega0"), "wc_over_omega0", pos, "must be positive")?,
            t_bath: field(self.f64("TB_over_omega0"), "TB_over_omega0", pos, "must be positive")?,
            t_system: field(self.f64("TS_over_omega0"), "TS_over_omega0", pos, "must be positive")?,
            initial,
            bloch: [self.f64("bloch_x")?, self.f64("bloch_y")?, self.f64("bloch_z")?],
            t_end: field(self.f64("t_end_over_ts"), "t_end_over_ts", pos, "must be positive")?,
            dt: field(self.f64("dt_over_ts"), "dt_over_ts", pos, "must be positive")?,
            store_stride: self.usize("store_stride")?,
            lamb_shift: self.get("lamb_shift") != "false",
            lamb_shift_paired: self.get("lamb_shift") == "paired",
            picture,
            quad: QuadratureConfig {
                pv_epsilon: self.f64("pv_epsilon")?,
                rel_tol: self.f64("quad_rel_tol")?,
                max_panels: self.usize("quad_max_panels")?,
                tail_cutoff_factor: self.f64("tail_cutoff_factor")?,
            },
            workers: self.usize("workers")?,
            tn_modes: self.usize("tn_modes")?,
            tn_w_max: field(self.f64("tn_w_max_over_omega0"), "tn_w_max_over_omega0", pos, "must be positive")?,
            tn_occupancy_cutoff: field(self.f64("tn_occupancy_cutoff"), "tn_occupancy_cutoff", nonneg, "must be non-negative")?,
            tn_uniform_dim: self.usize("tn_uniform_dim")?,
            tn_gibbs_tolerance: field(self.f64("tn_gibbs_tolerance"), "tn_gibbs_tolerance", nonneg, "must be non-negative")?,
            tn_truncation: Truncation {
                svd_cutoff: self.f64("tn_svd_cutoff")?,
                chi_max: self.usize("tn_chi_max")?,
                renormalization_limit: self.f64("tn_renormalization_limit")?,
            },
            tn_large_bath: self.bool("tn_large_bath")?,
        };
        rc.quad.validate().map_err(|e| err(e.to_string()))?;
        rc.tn_truncation.validate().map_err(|e| err(e.to_string()))?;
        if rc.store_stride == 0 {
            return Err(err("store_stride: must be at least 1"));
        }
        if rc.engine == Engine::Analytic && rc.picture != Picture::Interaction {
            return Err(err("engine: analytic requires picture = interaction"));
        }
        if rc.engine == Engine::Adme && rc.picture == Picture::Interaction {
            return Err(err("picture: the adme engine runs in the schroedinger picture"));
        }
        if rc.lamb_shift_paired && rc.engine != Engine::Tdme {
            return Err(err("lamb_shift: paired runs need engine = tdme"));
        }
        if rc.engine == Engine::Tn {
            if rc.tn_modes == 0 {
                return Err(err("tn_modes: must be at least 1"));
            }
            if rc.tn_modes > DESK_SCALE_MODES && !rc.tn_large_bath {
                return Err(err(format!("tn_modes: more than {DESK_SCALE_MODES} modes requires tn_large_bath = true")));
            }
            if rc.tn_uniform_dim == 1 {
                return Err(err("tn_uniform_dim: must be 0 (occupancy rule) or at least 2"));
            }
        }
        if rc.initial == InitialKind::Bloch && rc.bloch.iter().map(|x| x * x).sum::<f64>() > 1.0 + 1e-12 {
            return Err(err("bloch_x, bloch_y, bloch_z: vector must lie in the unit ball"));
        }
        Ok(rc)
    }
}

/// Typed configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: Engine,
    pub lambda_rabi: f64,
    pub lambda_drive: f64,
    pub coupling: f64,
    pub cutoff: f64,
    pub t_bath: f64,
    pub t_system: f64,
    pub initial: InitialKind,
    pub bloch: [f64; 3],
    pub t_end: f64,
    pub dt: f64,
    pub store_stride: usize,
    pub lamb_shift: bool,
    /// Paired runs with and without the Lamb shift.
    pub lamb_shift_paired: bool,
    pub picture: Picture,
    pub quad: QuadratureConfig,
    pub workers: usize,
    pub tn_modes: usize,
    pub tn_w_max: f64,
    pub tn_occupancy_cutoff: f64,
    pub tn_uniform_dim: usize,
    pub tn_gibbs_tolerance: f64,
    pub tn_truncation: Truncation,
    pub tn_large_bath: bool,
}

impl RunConfig {
    pub fn drive(&self) -> Result<DriveParams, ConfigError> {
        DriveParams::from_ratios(self.lambda_rabi, self.lambda_drive).map_err(|e| err(e.to_string()))
    }

    pub fn bath(&self) -> Result<BathSpec, ConfigError> {
        BathSpec::new(self.coupling, self.cutoff, self.t_bath).map_err(|e| err(e.to_string()))
    }

    pub fn initial_state(&self) -> InitialState<f64> {
        match self.initial {
            InitialKind::Thermal => InitialState::Thermal { ts: self.t_system },
            InitialKind::Superposition => InitialState::Superposition,
            InitialKind::Ground => InitialState::Ground,
            InitialKind::Excited => InitialState::Excited,
            InitialKind::Mixed => InitialState::MaximallyMixed,
            InitialKind::Bloch => InitialState::Bloch(self.bloch),
        }
    }

    pub fn initial_name(&self) -> &'static str {
        self.initial.name()
    }

    pub fn evolution(&self) -> EvolutionConfig {
        let solver = match self.engine {
            Engine::Adme => Solver::Adme,
            Engine::Unitary => Solver::Unitary,
            _ => Solver::Tdme,
        };
        EvolutionConfig {
            solver,
            lamb_shift: self.lamb_shift,
            picture: self.picture,
            dt: self.dt,
            t_end: self.t_end,
            store_stride: self.store_stride,
        }
    }

    pub fn tn(&self) -> TnConfig {
        TnConfig {
            n_modes: self.tn_modes,
            w_max: self.tn_w_max,
            occupancy_cutoff: self.tn_occupancy_cutoff,
            uniform_dim: (self.tn_uniform_dim >= 2).then_some(self.tn_uniform_dim),
            gibbs_tolerance: self.tn_gibbs_tolerance,
            dt: self.dt,
            t_end: self.t_end,
            store_stride: self.store_stride,
            truncation: self.tn_truncation,
        }
    }
}
