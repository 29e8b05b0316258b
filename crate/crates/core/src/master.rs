//! Master-equation generators (TDME, ADME, unitary), RK4 evolution and the
//! closed-form interaction-picture solution.

use crate::bath::{rates_at_energy, BathSpec, LambShiftTable, RateTriple};
use crate::error::{invalid, Error, Result};
use crate::propagators::{
    check_step, propagator_rhs, strong_envelope, PropagatorEntries, TimeGrid, WeakVariant, RESONANCE_GUARD,
};
use crate::quadrature::{cumulative_simpson, QuadratureConfig};
use crate::qubit::{
    hamiltonian, observables, Complex2x2, DensityMatrix2, DriveParams, Observables, HERMITICITY_TOL, POSITIVITY_TOL,
};
use crate::scalar::{cis, cplx, creal, imag_unit, lit, tol, Real, C};

/// Which derivation a [`JumpSet`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Built from the exact propagator.
    Tdme,
    /// Built from the instantaneous eigenprojectors.
    Adme,
    /// High-frequency closed form, global phase removed.
    StrongApprox,
    /// Weak-driving closed form, global phase removed.
    WeakApprox(WeakVariant),
    /// Interaction-picture operators `A_k`.
    Interaction,
}

/// Jump operators, rates and Lamb-shift Hamiltonian at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSet<T> {
    pub t: T,
    pub l0: Complex2x2<T>,
    pub l_plus: Complex2x2<T>,
    pub l_minus: Complex2x2<T>,
    pub rates: RateTriple<T>,
    pub h_ls: Complex2x2<T>,
    pub flavor: Flavor,
}

impl<T: Real> JumpSet<T> {
    pub fn operators(&self) -> [(T, &Complex2x2<T>); 3] {
        [(self.rates.gamma0, &self.l0), (self.rates.gamma_plus, &self.l_plus), (self.rates.gamma_minus, &self.l_minus)]
    }
}

/// Bath data shared by every generator evaluation: the spectral parameters
/// and the memoized Lamb-shift coefficient.
///
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment<T> {
    pub bath: BathSpec<T>,
    pub lamb: LambShiftTable<T>,
}

impl<T: Real> Environment<T> {
    pub fn new(p: &DriveParams<T>, bath: BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<Self> {
        Ok(Self { bath, lamb: LambShiftTable::build(p, &bath, quad)? })
    }

    fn rates(&self, t: T, energy: T) -> RateTriple<T> {
        rates_at_energy(t, energy, &self.bath)
    }
}

struct Angles<T> {
    energy: T,
    sin: T,
    cos: T,
}

fn angles<T: Real>(t: T, p: &DriveParams<T>) -> Angles<T> {
    let h = p.field(t);
    let energy = p.omega0().hypot(h);
    Angles { energy, sin: h / energy, cos: p.omega0() / energy }
}

fn pauli_combination<T: Real>(z: C<T>, plus: C<T>, minus: C<T>) -> Complex2x2<T> {
    Complex2x2::new(z, plus, minus, -z)
}

/// `U σ_z U† = (|α|²−|β|²)σ_z − 2αβσ₊ − 2α*β*σ₋`.
fn rotated_sigma_z<T: Real>(alpha: C<T>, beta: C<T>) -> Complex2x2<T> {
    let two = lit::<T>(2.0);
    let ab = alpha * beta;
    pauli_combination(creal(alpha.norm_sqr() - beta.norm_sqr()), -ab * two, -ab.conj() * two)
}

fn tdme_operators<T: Real>(
    t: T,
    alpha: C<T>,
    beta: C<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
) -> JumpSet<T> {
    let an = angles(t, p);
    let rot = rotated_sigma_z(alpha, beta);
    let l_plus = pauli_combination(alpha * beta.conj(), alpha * alpha, -(beta.conj() * beta.conj())) * creal(an.cos);
    let s = env.lamb.at_energy(an.energy);
    JumpSet {
        t,
        l0: rot.scale_re(an.sin),
        l_plus,
        l_minus: l_plus.adjoint(),
        rates: env.rates(t, an.energy),
        h_ls: rot.scale_re(-lit::<T>(0.5) * s * an.cos * an.cos),
        flavor: Flavor::Tdme,
    }
}

/// Tolerance on `|u.t − t|` relative to `max(1, |t|)`.
const TIMESTAMP_TOL: f64 = 1e-12;

/// TDME jump set from the propagator sampled at the same time.
pub fn jump_set_tdme<T: Real>(
    t: T,
    u: &PropagatorEntries<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
) -> Result<JumpSet<T>> {
    if !((u.t - t).abs() <= lit::<T>(TIMESTAMP_TOL) * t.abs().max(T::one())) {
        return Err(Error::TimestampMismatch {
            t: t.to_f64().unwrap_or(f64::NAN),
            propagator_t: u.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(tdme_operators(t, u.alpha, u.beta, p, env))
}

/// ADME jump set from the instantaneous eigenbasis.
///
/// The Lamb-shift Hamiltonian is `−½ S cos²φ H_S/E`, the TDME expression
/// evaluated on the adiabatic propagator.
pub fn jump_set_adme<T: Real>(t: T, p: &DriveParams<T>, env: &Environment<T>) -> JumpSet<T> {
    let an = angles(t, p);
    let half = lit::<T>(0.5);
    let (s, c) = (an.sin, an.cos);
    // cos²(φ/2) and sin²(φ/2)
    let (cc, ss) = ((T::one() + c) * half, (T::one() - c) * half);
    let z = creal(-half * s);
    let l_plus = pauli_combination(z, creal(cc), creal(-ss)) * creal(c);
    let l_minus = pauli_combination(z, creal(-ss), creal(cc)) * creal(c);
    let l0 = pauli_combination(creal(c), creal(s), creal(s)).scale_re(s);
    let lamb = env.lamb.at_energy(an.energy);
    JumpSet {
        t,
        l0,
        l_plus,
        l_minus,
        rates: env.rates(t, an.energy),
        h_ls: hamiltonian(t, p).scale_re(-half * lamb * c * c / an.energy),
        flavor: Flavor::Adme,
    }
}

/// High-frequency jump set: `L₀ = sin φ(σ_z − 2Fσ_y)`, `L₊ = cos φ(iFσ_z + σ₊)`.
pub fn jump_set_strong<T: Real>(t: T, p: &DriveParams<T>, env: &Environment<T>) -> JumpSet<T> {
    let an = angles(t, p);
    let f = strong_envelope(t, p);
    let two = lit::<T>(2.0);
    let bracket = Complex2x2::sigma_z() - Complex2x2::sigma_y().scale_re(two * f);
    let l_plus = pauli_combination(cplx(T::zero(), f), creal(T::one()), creal(T::zero())).scale_re(an.cos);
    let lamb = env.lamb.at_energy(an.energy);
    JumpSet {
        t,
        l0: bracket.scale_re(an.sin),
        l_plus,
        l_minus: l_plus.adjoint(),
        rates: env.rates(t, an.energy),
        h_ls: bracket.scale_re(-lit::<T>(0.5) * lamb * an.cos * an.cos),
        flavor: Flavor::StrongApprox,
    }
}

/// Weak-driving jump set, `L₀ = λ_Ω sin(λ_ω x)σ_z` and `L₊ = z σ_z + σ₊`.
///
/// `z = e^{2ix} αβ*` is the TDME coefficient evaluated on the matching
/// weak-driving propagator, so that removing the global phase `e^{−2ix}`
/// leaves the relative phase of the two terms intact. The Lamb shift keeps
/// the leading `−½ S cos²φ σ_z`.
pub fn jump_set_weak<T: Real>(
    t: T,
    p: &DriveParams<T>,
    env: &Environment<T>,
    variant: WeakVariant,
) -> Result<JumpSet<T>> {
    let an = angles(t, p);
    let x = t * p.omega0();
    let (lr, lw) = (p.lambda_rabi(), p.lambda_drive());
    let half = lit::<T>(0.5);
    let i = imag_unit::<T>();
    let sin_wx = (lw * x).sin();
    let z = match variant {
        WeakVariant::General => {
            let two = lit::<T>(2.0);
            if (lw - two).abs() < lit(RESONANCE_GUARD) {
                return Err(Error::Resonance { drive_ratio: lw.to_f64().unwrap_or(f64::NAN) });
            }
            let e2 = cis(x + x);
            let below = (cis(lw * x) - e2) / (lw - two);
            let above = (cis(-lw * x) - e2) / (lw + two);
            -i * (below + above) * (half * lr)
        }
        WeakVariant::LowFrequency => {
            let tail = (cis(x + x) - creal((lw * x).cos())) * i * (lit::<T>(0.25) * lr * lw);
            -tail - creal(half * lr * sin_wx)
        }
        WeakVariant::Adiabatic => creal(-half * lr * sin_wx),
    };
    let l_plus = pauli_combination(z, creal(T::one()), creal(T::zero()));
    let lamb = env.lamb.at_energy(an.energy);
    Ok(JumpSet {
        t,
        l0: Complex2x2::sigma_z().scale_re(lr * sin_wx),
        l_plus,
        l_minus: l_plus.adjoint(),
        rates: env.rates(t, an.energy),
        h_ls: Complex2x2::sigma_z().scale_re(-half * lamb * an.cos * an.cos),
        flavor: Flavor::WeakApprox(variant),
    })
}

/// Interaction-picture set `A₀ = sin φ σ_z`, `A± = cos φ σ±`,
/// `H̃_LS = −½ S cos²φ σ_z`.
pub fn jump_set_interaction<T: Real>(t: T, p: &DriveParams<T>, env: &Environment<T>) -> JumpSet<T> {
    let an = angles(t, p);
    let lamb = env.lamb.at_energy(an.energy);
    JumpSet {
        t,
        l0: Complex2x2::sigma_z().scale_re(an.sin),
        l_plus: Complex2x2::sigma_plus().scale_re(an.cos),
        l_minus: Complex2x2::sigma_minus().scale_re(an.cos),
        rates: env.rates(t, an.energy),
        h_ls: Complex2x2::sigma_z().scale_re(-lit::<T>(0.5) * lamb * an.cos * an.cos),
        flavor: Flavor::Interaction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Tdme,
    Adme,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Schroedinger,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig<T> {
    pub solver: Solver,
    pub lamb_shift: bool,
    pub picture: Picture,
    pub dt: T,
    pub t_end: T,
    /// Store every `store_stride`-th step (and the last).
    pub store_stride: usize,
}

impl<T: Real> EvolutionConfig<T> {
    pub fn new(solver: Solver, t_end: T) -> Self {
        Self { solver, lamb_shift: true, picture: Picture::Schroedinger, dt: lit(1e-3), t_end, store_stride: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_end > T::zero()) {
            return Err(invalid("t_end", "must be positive"));
        }
        if self.store_stride == 0 {
            return Err(invalid("store_stride", "must be at least 1"));
        }
        if self.picture == Picture::Interaction && self.solver == Solver::Adme {
            return Err(Error::Config("the interaction picture is defined for the tdme and unitary solvers".into()));
        }
        Ok(())
    }
}

/// `D[L]ρ = LρL† − ½{L†L, ρ}`.
pub fn dissipator<T: Real>(l: &Complex2x2<T>, rho: &Complex2x2<T>) -> Complex2x2<T> {
    let ld = l.adjoint();
    let ldl = ld * *l;
    *l * *rho * ld - ldl.anticommutator(rho).scale_re(lit(0.5))
}

/// Right-hand side of the master equation.
///
/// In the Schrödinger picture the coherent part is `−i[H_S + H_LS, ρ]`, in
/// the interaction picture `−i[H̃_LS, ρ]`. The Lamb-shift term is dropped
/// when `cfg.lamb_shift` is off; the unitary solver keeps only `−i[H_S, ρ]`.
pub fn generator_apply<T: Real>(
    rho: &Complex2x2<T>,
    js: &JumpSet<T>,
    t: T,
    p: &DriveParams<T>,
    cfg: &EvolutionConfig<T>,
) -> Result<Complex2x2<T>> {
    let compatible = match (cfg.solver, cfg.picture, js.flavor) {
        (Solver::Unitary, _, _) => true,
        (Solver::Adme, Picture::Schroedinger, Flavor::Adme) => true,
        (Solver::Tdme, Picture::Interaction, Flavor::Interaction) => true,
        (Solver::Tdme, Picture::Schroedinger, Flavor::Tdme | Flavor::StrongApprox | Flavor::WeakApprox(_)) => true,
        _ => false,
    };
    if !compatible {
        return Err(Error::Config(format!("jump set flavor {:?} does not match solver {:?}", js.flavor, cfg.solver)));
    }
    Ok(rhs(rho, js, t, p, cfg))
}

fn rhs<T: Real>(rho: &Complex2x2<T>, js: &JumpSet<T>, t: T, p: &DriveParams<T>, cfg: &EvolutionConfig<T>) -> Complex2x2<T> {
    let mi = -imag_unit::<T>();
    if cfg.solver == Solver::Unitary {
        return match cfg.picture {
            Picture::Schroedinger => hamiltonian(t, p).commutator(rho) * mi,
            Picture::Interaction => Complex2x2::zero(),
        };
    }
    let mut h = match cfg.picture {
        Picture::Schroedinger => hamiltonian(t, p),
        Picture::Interaction => Complex2x2::zero(),
    };
    if cfg.lamb_shift {
        h += js.h_ls;
    }
    let mut out = h.commutator(rho) * mi;
    for (gamma, l) in js.operators() {
        out += dissipator(l, rho).scale_re(gamma);
    }
    out
}

/// Unitary evolution alone: `−i[H_S, ρ]`.
pub fn unitary_rhs<T: Real>(rho: &Complex2x2<T>, t: T, p: &DriveParams<T>) -> Complex2x2<T> {
    hamiltonian(t, p).commutator(rho) * (-imag_unit::<T>())
}

/// Initial qubit preparations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState<T> {
    /// Gibbs state of `H_S(0)` at system temperature `T_S`.
    Thermal { ts: T },
    /// `(|g₀⟩ + |e₀⟩)/√2`.
    Superposition,
    MaximallyMixed,
    Ground,
    Excited,
    Bloch([T; 3]),
}

impl<T: Real> InitialState<T> {
    pub fn prepare(&self, p: &DriveParams<T>) -> Result<DensityMatrix2<T>> {
        let (one, zero) = (creal(T::one()), creal(T::zero()));
        match *self {
            InitialState::Thermal { ts } => DensityMatrix2::thermal(p.omega0(), ts),
            InitialState::Superposition => Ok(DensityMatrix2::superposition()),
            InitialState::MaximallyMixed => Ok(DensityMatrix2::maximally_mixed()),
            InitialState::Ground => DensityMatrix2::pure([zero, one]),
            InitialState::Excited => DensityMatrix2::pure([one, zero]),
            InitialState::Bloch(n) => DensityMatrix2::from_bloch(n),
        }
    }
}

/// One stored point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    /// State in the picture the run used.
    pub rho: DensityMatrix2<T>,
    /// Observables of the Schrödinger-picture state.
    pub observables: Observables<T>,
    /// Propagator at `t`, when the run integrated it.
    pub propagator: Option<PropagatorEntries<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub picture: Picture,
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Largest absolute difference of an observable between two runs on the
    /// same grid.
    pub fn max_difference(&self, other: &Self, f: impl Fn(&Observables<T>) -> T) -> T {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (f(&a.observables) - f(&b.observables)).abs())
            .fold(T::zero(), T::max)
    }
}

/// Trace drift that aborts an evolution.
pub const TRACE_ABORT: f64 = 1e-8;

fn checkpoint<T: Real>(t: T, m: &Complex2x2<T>) -> Result<DensityMatrix2<T>> {
    let ft = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let tr = m.trace();
    if !((tr.re - T::one()).abs() < tol(TRACE_ABORT)) || !(tr.im.abs() < tol(TRACE_ABORT)) {
        return Err(Error::TraceDrift { t: ft(t), trace: ft(tr.re) });
    }
    let herm = m.hermiticity_defect();
    if !(herm < tol::<T>(HERMITICITY_TOL * 100.0)) {
        return Err(Error::InvalidState(format!("hermiticity defect {:e} at t = {}", ft(herm), ft(t))));
    }
    let rho = DensityMatrix2::from_raw(*m);
    let lmin = rho.min_eigenvalue();
    if !(lmin >= -tol::<T>(POSITIVITY_TOL)) {
        return Err(Error::Positivity { t: ft(t), eigenvalue: ft(lmin) });
    }
    Ok(rho)
}

/// Integration state: the density matrix plus the propagator when the run
/// needs it.
#[derive(Clone, Copy)]
struct State<T> {
    rho: Complex2x2<T>,
    alpha: C<T>,
    beta: C<T>,
}

impl<T: Real> State<T> {
    fn axpy(&self, k: &Self, h: T) -> Self {
        Self { rho: self.rho + k.rho.scale_re(h), alpha: self.alpha + k.alpha * h, beta: self.beta + k.beta * h }
    }
}

struct Rhs<'a, T> {
    p: &'a DriveParams<T>,
    env: &'a Environment<T>,
    cfg: &'a EvolutionConfig<T>,
}

impl<T: Real> Rhs<'_, T> {
    fn eval(&self, t: T, s: &State<T>) -> State<T> {
        let (da, db) = propagator_rhs(t, s.alpha, s.beta, self.p);
        let js = match (self.cfg.solver, self.cfg.picture) {
            (Solver::Unitary, _) => None,
            (Solver::Adme, _) => Some(jump_set_adme(t, self.p, self.env)),
            (Solver::Tdme, Picture::Schroedinger) => Some(tdme_operators(t, s.alpha, s.beta, self.p, self.env)),
            (Solver::Tdme, Picture::Interaction) => Some(jump_set_interaction(t, self.p, self.env)),
        };
        let drho = match js {
            Some(js) => rhs(&s.rho, &js, t, self.p, self.cfg),
            None => match self.cfg.picture {
                Picture::Schroedinger => unitary_rhs(&s.rho, t, self.p),
                Picture::Interaction => Complex2x2::zero(),
            },
        };
        State { rho: drho, alpha: da, beta: db }
    }

    fn step(&self, t: T, dt: T, s: &State<T>) -> State<T> {
        let half = dt * lit(0.5);
        let k1 = self.eval(t, s);
        let k2 = self.eval(t + half, &s.axpy(&k1, half));
        let k3 = self.eval(t + half, &s.axpy(&k2, half));
        let k4 = self.eval(t + dt, &s.axpy(&k3, dt));
        let two = lit::<T>(2.0);
        let sum = State {
            rho: k1.rho + (k2.rho + k3.rho).scale_re(two) + k4.rho,
            alpha: k1.alpha + (k2.alpha + k3.alpha) * two + k4.alpha,
            beta: k1.beta + (k2.beta + k3.beta) * two + k4.beta,
        };
        s.axpy(&sum, dt / lit(6.0))
    }
}

/// Schrödinger-picture state from an interaction-picture one, `ρ = U ρ̃ U†`.
pub fn to_schroedinger<T: Real>(rho_tilde: &Complex2x2<T>, u: &PropagatorEntries<T>) -> Complex2x2<T> {
    let m = u.matrix();
    m * *rho_tilde * m.adjoint()
}

/// Interaction-picture state from a Schrödinger-picture one, `ρ̃ = U† ρ U`.
pub fn to_interaction<T: Real>(rho: &Complex2x2<T>, u: &PropagatorEntries<T>) -> Complex2x2<T> {
    let m = u.matrix();
    m.adjoint() * *rho * m
}

/// RK4 evolution of the density matrix.
///
/// The TDME integrates the propagator in lockstep with `ρ`: every RK4 stage
/// builds the jump operators from the stage values of `(α, β)`. The state
/// is validated at stored samples; a trace drift beyond [`TRACE_ABORT`] or a
/// negative eigenvalue beyond the positivity tolerance aborts the run.
pub fn evolve<T: Real>(
    rho0: &DensityMatrix2<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
    cfg: &EvolutionConfig<T>,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    check_step(p, cfg.dt)?;
    let grid = TimeGrid::new(cfg.t_end, cfg.dt, cfg.store_stride)?;
    let f = Rhs { p, env, cfg };
    // ρ̃(0) = ρ(0) since U(0) = 1
    let mut s = State { rho: *rho0.matrix(), alpha: creal(T::one()), beta: creal(T::zero()) };
    let with_u = cfg.solver == Solver::Tdme || cfg.picture == Picture::Interaction;
    let mut samples = Vec::with_capacity(grid.steps / grid.stride + 2);
    let record = |t: T, s: &State<T>| -> Result<Sample<T>> {
        let rho = checkpoint(t, &s.rho)?;
        let u = PropagatorEntries { t, alpha: s.alpha, beta: s.beta };
        let physical = match cfg.picture {
            Picture::Schroedinger => rho,
            Picture::Interaction => DensityMatrix2::from_raw(to_schroedinger(&s.rho, &u)),
        };
        Ok(Sample { t, rho, observables: observables(&physical, t, p), propagator: with_u.then_some(u) })
    };
    samples.push(record(T::zero(), &s)?);
    for k in 0..grid.steps {
        s = f.step(grid.time(k), cfg.dt, &s);
        if grid.is_stored(k + 1) {
            samples.push(record(grid.time(k + 1), &s)?);
        }
    }
    Ok(Trajectory { picture: cfg.picture, samples })
}

/// Interaction-picture Bloch components `c_z = Tr(σ_z ρ̃)` and
/// `c₊ = 2 Tr(σ₊ ρ̃) = 2ρ̃_ge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochInteraction<T> {
    pub t: T,
    pub c_z: T,
    pub c_plus: C<T>,
}

impl<T: Real> BlochInteraction<T> {
    pub fn from_state(t: T, rho_tilde: &Complex2x2<T>) -> Self {
        let two = lit::<T>(2.0);
        Self { t, c_z: (rho_tilde[(0, 0)] - rho_tilde[(1, 1)]).re, c_plus: rho_tilde[(1, 0)] * two }
    }

    pub fn to_state(&self) -> Result<DensityMatrix2<T>> {
        let half = lit::<T>(0.5);
        DensityMatrix2::new(Complex2x2::new(
            creal((T::one() + self.c_z) * half),
            self.c_plus.conj() * half,
            self.c_plus * half,
            creal((T::one() - self.c_z) * half),
        ))
    }

    /// Largest componentwise difference.
    pub fn max_deviation(&self, other: &Self) -> T {
        let dz = (self.c_z - other.c_z).abs();
        let dp = self.c_plus - other.c_plus;
        dz.max(dp.re.abs()).max(dp.im.abs())
    }
}

/// Closed-form interaction-picture solution on a uniform grid:
///
/// `c_z(t) = c_z(0) e^{−ζ(t)} + ∫₀ᵗ (γ₊−γ₋) cos²φ e^{−(ζ(t)−ζ(s))} ds`,
/// `c₊(t) = c₊(0) e^{−i∫ S cos²φ} e^{−ζ/2 − 2γ₀∫ sin²φ}`,
/// with `ζ(t) = ∫₀ᵗ (γ₊+γ₋) cos²φ`. Time integrals use cumulative Simpson
/// on the `dt` grid; samples follow the same stride as [`evolve`].
pub fn analytic_interaction_trajectory<T: Real>(
    c_z0: T,
    c_plus0: C<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
    t_end: T,
    dt: T,
    stride: usize,
    lamb_shift: bool,
) -> Result<Vec<BlochInteraction<T>>> {
    if !(c_z0.abs() <= T::one()) || !(c_z0 * c_z0 + c_plus0.norm_sqr() <= T::one() + lit(1e-12)) {
        return Err(invalid("c0", "initial Bloch components must lie in the unit ball"));
    }
    let grid = TimeGrid::new(t_end, dt, stride)?;
    let n = grid.steps + 1;
    let (mut sum_cos, mut diff_cos, mut sin2, mut shift) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut gamma0 = T::zero();
    for k in 0..n {
        let t = grid.time(k);
        let an = angles(t, p);
        let r = env.rates(t, an.energy);
        let c2 = an.cos * an.cos;
        gamma0 = r.gamma0;
        sum_cos[k] = (r.gamma_plus + r.gamma_minus) * c2;
        diff_cos[k] = (r.gamma_plus - r.gamma_minus) * c2;
        sin2[k] = an.sin * an.sin;
        if lamb_shift {
            shift[k] = env.lamb.at_energy(an.energy) * c2;
        }
    }
    let zeta = cumulative_simpson(&sum_cos, dt);
    let weighted: Vec<T> = diff_cos.iter().zip(&zeta).map(|(d, z)| *d * z.exp()).collect();
    let source = cumulative_simpson(&weighted, dt);
    let dephase = cumulative_simpson(&sin2, dt);
    let phase = cumulative_simpson(&shift, dt);
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    Ok((0..n)
        .filter(|&k| grid.is_stored(k))
        .map(|k| {
            let decay = (-zeta[k]).exp();
            BlochInteraction {
                t: grid.time(k),
                c_z: (c_z0 + source[k]) * decay,
                c_plus: c_plus0 * cis(-phase[k]) * (-half * zeta[k] - two * gamma0 * dephase[k]).exp(),
            }
        })
        .collect())
}

/// Closed-form solution at a single time `t`, integrals on a grid of step
/// at most `dt`.
pub fn analytic_interaction_solution<T: Real>(
    c_z0: T,
    c_plus0: C<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
    t: T,
    dt: T,
) -> Result<BlochInteraction<T>> {
    if t == T::zero() {
        return Ok(BlochInteraction { t, c_z: c_z0, c_plus: c_plus0 });
    }
    let steps = (t / dt).ceil().max(T::one());
    let h = t / steps;
    let n = steps.to_usize().ok_or_else(|| invalid("dt", "too many steps"))?;
    let traj = analytic_interaction_trajectory(c_z0, c_plus0, p, env, t, h, n, true)?;
    Ok(*traj.last().expect("grid holds at least two points"))
}

/// Paired TDME runs with and without the Lamb shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LambShiftComparison<T> {
    pub with_shift: Trajectory<T>,
    pub without_shift: Trajectory<T>,
    /// `⟨σ_x⟩_with − ⟨σ_x⟩_without` per sample.
    pub sx_shift: Vec<T>,
    /// Gap of `H_S` per sample.
    pub gap: Vec<T>,
    /// Gap of `H_S + H_LS` per sample.
    pub gap_shifted: Vec<T>,
}

pub fn lamb_shift_ab_test<T: Real>(
    rho0: &DensityMatrix2<T>,
    p: &DriveParams<T>,
    env: &Environment<T>,
    cfg: &EvolutionConfig<T>,
) -> Result<LambShiftComparison<T>> {
    if cfg.solver != Solver::Tdme {
        return Err(Error::Config("the Lamb-shift comparison runs the tdme solver".into()));
    }
    let with_shift = evolve(rho0, p, env, &EvolutionConfig { lamb_shift: true, ..*cfg })?;
    let without_shift = evolve(rho0, p, env, &EvolutionConfig { lamb_shift: false, ..*cfg })?;
    let sx_shift = with_shift
        .samples
        .iter()
        .zip(&without_shift.samples)
        .map(|(a, b)| a.observables.sx - b.observables.sx)
        .collect();
    let mut gap = Vec::with_capacity(with_shift.samples.len());
    let mut gap_shifted = Vec::with_capacity(with_shift.samples.len());
    for s in &with_shift.samples {
        let u = s.propagator.expect("tdme runs carry the propagator");
        let js = jump_set_tdme(s.t, &u, p, env)?;
        let spread = |m: Complex2x2<T>| {
            let (ev, _) = m.hermitian_eigen();
            ev[1] - ev[0]
        };
        let h = hamiltonian(s.t, p);
        gap.push(spread(h));
        gap_shifted.push(spread(h + js.h_ls));
    }
    Ok(LambShiftComparison { with_shift, without_shift, sx_shift, gap, gap_shifted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::{propagate_closed, strong_driving_expansion, StrongForm};
    use num_complex::Complex64;

    fn env(p: &DriveParams<f64>, tb: f64) -> Environment<f64> {
        Environment::new(p, BathSpec::new(5e-3, 2.0, tb).unwrap(), &QuadratureConfig::default()).unwrap()
    }

    fn fast_drive() -> DriveParams<f64> {
        DriveParams::from_ratios(1.0, 10.0).unwrap()
    }

    #[test]
    fn tdme_jump_set_at_origin() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let js = jump_set_tdme(0.0, &PropagatorEntries::identity(), &p, &e).unwrap();
        assert!(js.l0.max_abs() < 1e-15);
        assert!((js.l_plus - Complex2x2::sigma_plus()).max_abs() < 1e-15);
        assert!((js.l_minus - Complex2x2::sigma_minus()).max_abs() < 1e-15);
        let s0 = e.lamb.at_energy(1.0);
        assert!((js.h_ls - Complex2x2::sigma_z().scale_re(-0.5 * s0)).max_abs() < 1e-15);
    }

    #[test]
    fn tdme_jump_set_rejects_stale_propagator() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let u = PropagatorEntries { t: 0.1, ..PropagatorEntries::identity() };
        assert!(matches!(jump_set_tdme(0.2, &u, &p, &e), Err(Error::TimestampMismatch { .. })));
    }

    #[test]
    fn tdme_operators_are_rotated_interaction_operators() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let traj = propagate_closed(&p, 1.0, 1e-3, 37).unwrap();
        for u in &traj {
            let js = jump_set_tdme(u.t, u, &p, &e).unwrap();
            let a = jump_set_interaction(u.t, &p, &e);
            let m = u.matrix();
            for (l, x) in [(&js.l0, &a.l0), (&js.l_plus, &a.l_plus), (&js.l_minus, &a.l_minus), (&js.h_ls, &a.h_ls)] {
                assert!((*l - m * *x * m.adjoint()).max_abs() < 1e-12);
            }
            assert!(js.l0.trace().norm() < 1e-14 && js.l_plus.trace().norm() < 1e-14);
            assert!((js.l_minus - js.l_plus.adjoint()).max_abs() == 0.0);
            assert!(js.h_ls.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn adme_jump_set_forms() {
        let p = DriveParams::from_ratios(1.0, 1.0).unwrap();
        let e = env(&p, 4.0);
        let js = jump_set_adme(0.0, &p, &e);
        assert!(js.l0.max_abs() < 1e-15);
        assert!((js.l_plus - Complex2x2::sigma_plus()).max_abs() < 1e-15);
        // ωt = π/2 with λ_Ω = 1 gives φ = π/4
        let t = std::f64::consts::FRAC_PI_2;
        let js = jump_set_adme(t, &p, &e);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expected = (Complex2x2::sigma_z() + Complex2x2::sigma_x()).scale_re(r * r);
        assert!((js.l0 - expected).max_abs() < 1e-15);
        for t in [0.0, 0.4, 1.1, 2.9] {
            let js = jump_set_adme(t, &p, &e);
            assert!(js.h_ls.commutator(&hamiltonian(t, &p)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn adme_matches_tdme_on_adiabatic_propagator() {
        // the ADME set is the TDME set evaluated on U^ad, up to the phase e^{−2iθ} on L±
        let p = DriveParams::from_ratios(0.8, 0.6).unwrap();
        let e = env(&p, 4.0);
        for (t, theta) in [(0.3, 0.31), (1.7, 1.9)] {
            let u = crate::propagators::adiabatic_entries(t, theta, &p);
            let tdme = jump_set_tdme(t, &u, &p, &e).unwrap();
            let adme = jump_set_adme(t, &p, &e);
            assert!((tdme.l0 - adme.l0).max_abs() < 1e-14);
            assert!((tdme.l_plus - adme.l_plus * cis(-2.0 * theta)).max_abs() < 1e-14);
            assert!((tdme.h_ls - adme.h_ls).max_abs() < 1e-14);
        }
    }

    #[test]
    fn strong_jump_set_forms() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        for k in 0..3 {
            let t = std::f64::consts::TAU * k as f64 / 10.0;
            let js = jump_set_strong(t, &p, &e);
            let an = angles(t, &p);
            assert!((js.l0 - Complex2x2::sigma_z().scale_re(an.sin)).max_abs() < 1e-14);
        }
        // the strong set is the TDME set on the first-order propagator, phase e^{−2ix} removed from L₊
        let t = 0.21;
        let u = strong_driving_expansion(t, &p, StrongForm::FirstOrder);
        let tdme = jump_set_tdme(t, &u, &p, &e).unwrap();
        let strong = jump_set_strong(t, &p, &e);
        let f = strong_envelope(t, &p);
        assert!((tdme.l0 - strong.l0).max_abs() < 2.0 * f * f);
        assert!((tdme.l_plus - strong.l_plus * cis(-2.0 * t)).max_abs() < 2.0 * f * f);
    }

    #[test]
    fn weak_adiabatic_set_matches_adme() {
        let run = |lr: f64| {
            let p = DriveParams::from_ratios(lr, 0.05).unwrap();
            let e = env(&p, 4.0);
            (0..200)
                .map(|i| {
                    let t = p.period() * i as f64 / 200.0;
                    let w = jump_set_weak(t, &p, &e, WeakVariant::Adiabatic).unwrap();
                    let a = jump_set_adme(t, &p, &e);
                    (w.l0 - a.l0).max_abs().max((w.l_plus - a.l_plus).max_abs())
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (run(0.05), run(0.025));
        assert!(e1 < 0.05 * 0.05 * 2.0, "{e1}");
        assert!(e1 / e2 > 3.5, "{}", e1 / e2);
    }

    #[test]
    fn weak_sets_are_tdme_on_weak_propagators() {
        for (variant, lw) in [(WeakVariant::General, 0.7), (WeakVariant::LowFrequency, 0.05)] {
            let p = DriveParams::from_ratios(0.02, lw).unwrap();
            let e = env(&p, 4.0);
            for t in [0.3, 2.2, 5.0] {
                let u = crate::propagators::weak_driving_expansion(t, &p, variant).unwrap();
                let tdme = jump_set_tdme(t, &u, &p, &e).unwrap();
                let weak = jump_set_weak(t, &p, &e, variant).unwrap();
                assert!((tdme.l_plus - weak.l_plus * cis(-2.0 * t)).max_abs() < 5.0 * 0.02 * 0.02);
                assert!((tdme.l0 - weak.l0).max_abs() < 5.0 * 0.02 * 0.02);
            }
        }
        let p = DriveParams::from_ratios(0.02, 0.7).unwrap();
        let e = env(&p, 4.0);
        let p = DriveParams::from_ratios(0.02, 2.0).unwrap();
        assert!(jump_set_weak(0.1, &p, &e, WeakVariant::General).is_err());
    }

    #[test]
    fn dissipator_on_maximally_mixed() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let js = jump_set_tdme(0.0, &PropagatorEntries::identity(), &p, &e).unwrap();
        let cfg = EvolutionConfig { lamb_shift: false, ..EvolutionConfig::new(Solver::Tdme, 1.0) };
        let rho = DensityMatrix2::<f64>::maximally_mixed();
        let out = generator_apply(rho.matrix(), &js, 0.0, &p, &cfg).unwrap();
        let expected = Complex2x2::sigma_z().scale_re((js.rates.gamma_plus - js.rates.gamma_minus) / 2.0);
        assert!((out - expected).max_abs() < 1e-15);
    }

    #[test]
    fn generator_rejects_mismatched_flavor() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let js = jump_set_adme(0.0, &p, &e);
        let cfg = EvolutionConfig::new(Solver::Tdme, 1.0);
        assert!(generator_apply(DensityMatrix2::maximally_mixed().matrix(), &js, 0.0, &p, &cfg).is_err());
    }

    #[test]
    fn static_relaxation_to_gibbs() {
        // drive off: the state relaxes to the Gibbs state of ω₀σ_z at T_B
        let p = DriveParams::new(1.0, 0.0, 1.0).unwrap();
        let e = Environment::new(&p, BathSpec::new(0.05, 2.0, 1.5).unwrap(), &QuadratureConfig::default()).unwrap();
        let mut cfg = EvolutionConfig::new(Solver::Tdme, 150.0);
        cfg.dt = 1e-2;
        cfg.store_stride = 1000;
        let rho0 = InitialState::Thermal { ts: 0.3 }.prepare(&p).unwrap();
        let traj = evolve(&rho0, &p, &e, &cfg).unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.observables.sz + (1.0f64 / 1.5).tanh()).abs() < 1e-6, "{}", last.observables.sz);
    }

    #[test]
    fn interaction_picture_matches_conjugated_schroedinger_run() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let rho0 = DensityMatrix2::superposition();
        let cfg = EvolutionConfig { store_stride: 100, ..EvolutionConfig::new(Solver::Tdme, 5.0) };
        let s = evolve(&rho0, &p, &e, &cfg).unwrap();
        let i = evolve(&rho0, &p, &e, &EvolutionConfig { picture: Picture::Interaction, ..cfg }).unwrap();
        for (a, b) in s.samples.iter().zip(&i.samples) {
            let back = to_interaction(a.rho.matrix(), &a.propagator.unwrap());
            assert!((back - *b.rho.matrix()).max_abs() < 1e-7);
        }
    }

    #[test]
    fn analytic_solution_constant_rates() {
        let p = DriveParams::new(1.0, 0.0, 1.0).unwrap();
        let e = env(&p, 4.0);
        let r = crate::bath::rates(0.0, &p, &e.bath);
        let (gs, gd) = (r.gamma_plus + r.gamma_minus, r.gamma_plus - r.gamma_minus);
        let t = 3.0;
        let sol = analytic_interaction_solution(0.4, Complex64::new(0.0, 0.0), &p, &e, t, 1e-3).unwrap();
        let expected = 0.4 * (-gs * t).exp() + gd / gs * (1.0 - (-gs * t).exp());
        assert!((sol.c_z - expected).abs() < 1e-12);
        assert_eq!(sol.c_plus, C::new(0.0, 0.0));
    }

    #[test]
    fn bloch_interaction_round_trip() {
        let b = BlochInteraction { t: 0.0, c_z: 0.3, c_plus: Complex64::new(0.2, -0.4) };
        let rho = b.to_state().unwrap();
        let back = BlochInteraction::from_state(0.0, rho.matrix());
        assert!(back.max_deviation(&b) < 1e-16);
        assert!(BlochInteraction { t: 0.0, c_z: 0.9, c_plus: Complex64::new(0.9, 0.0) }.to_state().is_err());
    }

    #[test]
    fn lamb_shift_gap_at_origin() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let cfg = EvolutionConfig { store_stride: 100, ..EvolutionConfig::new(Solver::Tdme, 0.5) };
        let cmp = lamb_shift_ab_test(&DensityMatrix2::superposition(), &p, &e, &cfg).unwrap();
        let s0 = e.lamb.at_energy(1.0);
        assert!((cmp.gap_shifted[0] - cmp.gap[0] + s0).abs() < 1e-14);
        assert_eq!(cmp.sx_shift[0], 0.0);
    }

    #[test]
    fn unitary_run_preserves_purity() {
        let p = fast_drive();
        let e = env(&p, 4.0);
        let cfg = EvolutionConfig { store_stride: 500, ..EvolutionConfig::new(Solver::Unitary, 10.0) };
        let traj = evolve(&DensityMatrix2::superposition(), &p, &e, &cfg).unwrap();
        for s in &traj.samples {
            assert!((s.observables.purity - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn adme_interaction_picture_is_rejected() {
        let cfg = EvolutionConfig { picture: Picture::Interaction, ..EvolutionConfig::<f64>::new(Solver::Adme, 1.0) };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn initial_states() {
        let p = fast_drive();
        let g = InitialState::Ground.prepare(&p).unwrap();
        assert_eq!(g.bloch()[2], -1.0);
        let s = InitialState::<f64>::Superposition.prepare(&p).unwrap();
        assert!((s.bloch()[0] - 1.0).abs() < 1e-15);
        assert!(InitialState::Bloch([0.0, 0.0, 1.5]).prepare(&p).is_err());
    }
}
