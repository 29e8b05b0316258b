use driven_lindblad::propagators::TimeGrid;
use driven_lindblad::qubit::{observables, DensityMatrix2, DriveParams, Observables};
use driven_lindblad::BathSpec;

use crate::bath::{discretize_bath, DiscretizedBath, GIBBS_TOLERANCE, OCCUPANCY_CUTOFF};
use crate::error::{invalid, Result};
use crate::mps::{initial_purified_state_with, tebd_step, StepGates, Truncation};

/// Bath size that runs in minutes on a workstation.
pub const DESK_SCALE_MODES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct TnConfig {
    pub n_modes: usize,
    pub w_max: f64,
    pub occupancy_cutoff: f64,
    /// Replaces the occupancy rule with one dimension for every mode.
    pub uniform_dim: Option<usize>,
    pub gibbs_tolerance: f64,
    pub dt: f64,
    pub t_end: f64,
    pub store_stride: usize,
    pub truncation: Truncation,
}

impl Default for TnConfig {
    fn default() -> Self {
        Self {
            n_modes: DESK_SCALE_MODES,
            w_max: 10.0,
            occupancy_cutoff: OCCUPANCY_CUTOFF,
            uniform_dim: None,
            gibbs_tolerance: GIBBS_TOLERANCE,
            dt: 1e-2,
            t_end: 10.0,
            store_stride: 10,
            truncation: Truncation::default(),
        }
    }
}

impl TnConfig {
    pub fn bath(&self, b: &BathSpec) -> Result<DiscretizedBath> {
        let bath = discretize_bath(b, self.n_modes, self.w_max, self.occupancy_cutoff)?;
        match self.uniform_dim {
            Some(d) => bath.with_uniform_dim(d),
            None => Ok(bath),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnSample {
    pub t: f64,
    pub rho: DensityMatrix2<f64>,
    pub observables: Observables<f64>,
    pub max_bond: usize,
    /// Cumulative discarded weight up to `t`.
    pub discarded_weight: f64,
    /// `t` lies past the recurrence guard.
    pub beyond_recurrence: bool,
}

#[derive(Debug, Clone)]
pub struct TnTrajectory {
    pub samples: Vec<TnSample>,
    pub bath: DiscretizedBath,
    pub t_max: f64,
    pub warnings: Vec<String>,
}

pub fn tn_run(rho_s0: &DensityMatrix2<f64>, p: &DriveParams<f64>, b: &BathSpec, cfg: &TnConfig) -> Result<TnTrajectory> {
    tn_run_on(rho_s0, p, &cfg.bath(b)?, cfg)
}

/// Runs on an already discretized bath; `cfg` supplies the time grid,
/// truncation and Gibbs tolerance.
pub fn tn_run_on(rho_s0: &DensityMatrix2<f64>, p: &DriveParams<f64>, bath: &DiscretizedBath, cfg: &TnConfig) -> Result<TnTrajectory> {
    if !(cfg.t_end > 0.0) {
        return Err(invalid("t_end", "must be positive"));
    }
    let grid = TimeGrid::new(cfg.t_end, cfg.dt, cfg.store_stride)?;
    let gates = StepGates::new(bath, p, cfg.dt)?;
    let t_b = bath.spec.temperature();
    let mut psi = initial_purified_state_with(rho_s0, bath, t_b, cfg.gibbs_tolerance, cfg.truncation)?;
    let t_max = bath.recurrence_time(t_b);
    let mut warnings = Vec::new();
    if bath.len() > DESK_SCALE_MODES {
        warnings.push(format!("{} bath modes exceed the desk-scale size {DESK_SCALE_MODES}; expect long runtimes", bath.len()));
    }
    if bath.cutoff_degraded {
        warnings.push(format!("w_max = {} lies below w_c = {}; truncation error eps1 = {:e}", bath.w_max, bath.spec.cutoff(), bath.eps1));
    }
    if grid.end() > t_max {
        warnings.push(format!("t_end = {} exceeds the recurrence guard t_max = {t_max}", grid.end()));
    }
    let sample = |psi: &crate::mps::PurifiedMps, t: f64| -> Result<TnSample> {
        let rho = psi.spin_state()?;
        Ok(TnSample {
            t,
            rho,
            observables: observables(&rho, t, p),
            max_bond: psi.max_bond(),
            discarded_weight: psi.discarded_weight(),
            beyond_recurrence: t > t_max,
        })
    };
    let mut samples = Vec::with_capacity(grid.steps / grid.stride + 2);
    samples.push(sample(&psi, 0.0)?);
    for k in 0..grid.steps {
        tebd_step(&mut psi, grid.time(k), p, &gates)?;
        if grid.is_stored(k + 1) {
            samples.push(sample(&psi, grid.time(k + 1))?);
        }
    }
    Ok(TnTrajectory { samples, bath: bath.clone(), t_max, warnings })
}
