//! Closed-system propagator `U_S(t) = [[α, β], [−β*, α*]]`, its adiabatic
//! counterpart and the asymptotic strong- and weak-driving forms.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{cumulative_simpson, integrate, QuadratureConfig};
use crate::qubit::{Complex2x2, DriveParams};
use crate::scalar::{cis, creal, from_usize, imag_unit, lit, tol, Real, C};

/// Unitarity drift that aborts [`propagate_closed`].
pub const UNITARITY_ABORT: f64 = 1e-6;

/// Entries `(α, β)` of the propagator at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorEntries<T> {
    pub t: T,
    pub alpha: C<T>,
    pub beta: C<T>,
}

impl<T: Real> PropagatorEntries<T> {
    pub fn identity() -> Self {
        Self { t: T::zero(), alpha: creal(T::one()), beta: creal(T::zero()) }
    }

    pub fn matrix(&self) -> Complex2x2<T> {
        Complex2x2::new(self.alpha, self.beta, -self.beta.conj(), self.alpha.conj())
    }

    /// `|α|² + |β|² − 1`.
    pub fn norm_defect(&self) -> T {
        self.alpha.norm_sqr() + self.beta.norm_sqr() - T::one()
    }

    /// Largest entrywise modulus of the difference of the two propagators.
    pub fn max_deviation(&self, other: &Self) -> T {
        (self.alpha - other.alpha).norm().max((self.beta - other.beta).norm())
    }
}

/// `(dα/dt, dβ/dt)` from `iα̇ = ω₀α − h β*`, `iβ̇ = ω₀β + h α*`.
#[inline]
pub fn propagator_rhs<T: Real>(t: T, alpha: C<T>, beta: C<T>, p: &DriveParams<T>) -> (C<T>, C<T>) {
    let h = p.field(t);
    let w = p.omega0();
    let mi = -imag_unit::<T>();
    (mi * (alpha * w - beta.conj() * h), mi * (beta * w + alpha.conj() * h))
}

/// One classical RK4 step of the propagator ODEs.
pub fn rk4_step<T: Real>(t: T, dt: T, alpha: C<T>, beta: C<T>, p: &DriveParams<T>) -> (C<T>, C<T>) {
    let half = dt * lit(0.5);
    let (ka1, kb1) = propagator_rhs(t, alpha, beta, p);
    let (ka2, kb2) = propagator_rhs(t + half, alpha + ka1 * half, beta + kb1 * half, p);
    let (ka3, kb3) = propagator_rhs(t + half, alpha + ka2 * half, beta + kb2 * half, p);
    let (ka4, kb4) = propagator_rhs(t + dt, alpha + ka3 * dt, beta + kb3 * dt, p);
    let sixth = dt / lit(6.0);
    let two = lit::<T>(2.0);
    (
        alpha + (ka1 + (ka2 + ka3) * two + ka4) * sixth,
        beta + (kb1 + (kb2 + kb3) * two + kb4) * sixth,
    )
}

/// Uniform time grid `t_k = k·dt`, `k = 0..=steps`, with `steps·dt ≥ t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub dt: T,
    pub steps: usize,
    pub stride: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_end: T, dt: T, stride: usize) -> Result<Self> {
        if !(t_end > T::zero()) || !t_end.is_finite() {
            return Err(invalid("t_end", "must be positive"));
        }
        if !(dt > T::zero()) || dt > t_end {
            return Err(invalid("dt", "must be positive and not exceed t_end"));
        }
        if stride == 0 {
            return Err(invalid("store_stride", "must be at least 1"));
        }
        let ratio = t_end / dt;
        let steps = (ratio - lit(1e-9)).ceil().to_usize().ok_or_else(|| invalid("dt", "too many steps"))?;
        Ok(Self { dt, steps: steps.max(1), stride })
    }

    pub fn time(&self, k: usize) -> T {
        from_usize::<T>(k) * self.dt
    }

    pub fn end(&self) -> T {
        self.time(self.steps)
    }

    /// Whether step `k` is a stored sample (every `stride` steps plus the last).
    pub fn is_stored(&self, k: usize) -> bool {
        k % self.stride == 0 || k == self.steps
    }
}

/// Checks the step-size precondition `dt ≤ 10⁻² t_s`.
pub fn check_step<T: Real>(p: &DriveParams<T>, dt: T) -> Result<()> {
    if dt > lit::<T>(1e-2) * p.t_s() * (T::one() + lit(1e-12)) {
        return Err(invalid("dt", "must not exceed 1e-2 t_s"));
    }
    Ok(())
}

/// RK4 trajectory of the propagator from `α(0) = 1, β(0) = 0`, stored
/// every `stride` steps.
///
/// Aborts with [`Error::UnitarityDrift`] once `||α|² + |β|² − 1|` exceeds
/// [`UNITARITY_ABORT`].
pub fn propagate_closed<T: Real>(p: &DriveParams<T>, t_end: T, dt: T, stride: usize) -> Result<Vec<PropagatorEntries<T>>> {
    check_step(p, dt)?;
    let grid = TimeGrid::new(t_end, dt, stride)?;
    let mut out = Vec::with_capacity(grid.steps / stride + 2);
    let (mut a, mut b) = (creal(T::one()), creal(T::zero()));
    out.push(PropagatorEntries::identity());
    let abort = tol::<T>(UNITARITY_ABORT);
    for k in 0..grid.steps {
        (a, b) = rk4_step(grid.time(k), dt, a, b, p);
        let t = grid.time(k + 1);
        let entry = PropagatorEntries { t, alpha: a, beta: b };
        let drift = entry.norm_defect().abs();
        if !(drift <= abort) {
            return Err(Error::UnitarityDrift {
                t: t.to_f64().unwrap_or(f64::NAN),
                drift: drift.to_f64().unwrap_or(f64::NAN),
            });
        }
        if grid.is_stored(k + 1) {
            out.push(entry);
        }
    }
    Ok(out)
}

/// Dynamical phase `θ(t) = ∫₀ᵗ E(s) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPhase<T> {
    pub t: T,
    pub dynamical_phase: T,
}

/// Adiabatic entries `α = e^{−iθ} cos(φ/2)`, `β = −e^{iθ} sin(φ/2)`.
pub fn adiabatic_entries<T: Real>(t: T, phase: T, p: &DriveParams<T>) -> PropagatorEntries<T> {
    let half = p.field(t).atan2(p.omega0()) * lit(0.5);
    PropagatorEntries { t, alpha: cis(-phase) * half.cos(), beta: -cis(phase) * half.sin() }
}

/// Adiabatic propagator at a single time, with the dynamical phase from
/// adaptive quadrature.
pub fn adiabatic_propagator<T: Real>(t: T, p: &DriveParams<T>, quad: &QuadratureConfig<T>) -> Result<PropagatorEntries<T>> {
    Ok(adiabatic_entries(t, dynamical_phase(t, p, quad)?.dynamical_phase, p))
}

pub fn dynamical_phase<T: Real>(t: T, p: &DriveParams<T>, quad: &QuadratureConfig<T>) -> Result<AdiabaticPhase<T>> {
    quad.validate()?;
    if !(t >= T::zero()) {
        return Err(invalid("t", "must be non-negative"));
    }
    if t == T::zero() {
        return Ok(AdiabaticPhase { t, dynamical_phase: T::zero() });
    }
    // resolve each drive half-period separately
    let pieces = (t / (p.period() * lit(0.5))).ceil().to_usize().unwrap_or(1).clamp(1, 100_000);
    let h = t / from_usize(pieces);
    let tol = quad.rel_tol * p.omega0() * h;
    let mut acc = T::zero();
    for i in 0..pieces {
        let a = h * from_usize(i);
        acc = acc + integrate(|s| p.energy(s), a, a + h, tol, quad.rel_tol, quad.max_panels)?.value;
    }
    Ok(AdiabaticPhase { t, dynamical_phase: acc })
}

/// Adiabatic propagator on the grid of a stored trajectory, with the
/// dynamical phase from cumulative Simpson on the full `dt` grid.
pub fn adiabatic_trajectory<T: Real>(p: &DriveParams<T>, t_end: T, dt: T, stride: usize) -> Result<Vec<PropagatorEntries<T>>> {
    let grid = TimeGrid::new(t_end, dt, stride)?;
    let energies: Vec<T> = (0..=grid.steps).map(|k| p.energy(grid.time(k))).collect();
    let phase = cumulative_simpson(&energies, dt);
    Ok((0..=grid.steps)
        .filter(|&k| grid.is_stored(k))
        .map(|k| adiabatic_entries(grid.time(k), phase[k], p))
        .collect())
}

/// Which closed form of the high-frequency expansion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrongForm {
    /// `α = e^{−ix} cos F`, `β = −i e^{ix} sin F`, exactly unit-norm.
    Rotating,
    /// `α = e^{−ix}`, `β = −i e^{ix} F`, the lowest order in `F`.
    FirstOrder,
}

/// `F(x) = (λ_Ω/λ_ω)(1 − cos(λ_ω x))`.
pub fn strong_envelope<T: Real>(t: T, p: &DriveParams<T>) -> T {
    let x = t * p.omega0();
    p.lambda_rabi() / p.lambda_drive() * (T::one() - (p.lambda_drive() * x).cos())
}

/// High-frequency (`λ_ω ≫ 1`) approximation of the propagator.
pub fn strong_driving_expansion<T: Real>(t: T, p: &DriveParams<T>, form: StrongForm) -> PropagatorEntries<T> {
    let x = t * p.omega0();
    let f = strong_envelope(t, p);
    let mi = -imag_unit::<T>();
    let (alpha, beta) = match form {
        StrongForm::Rotating => (cis(-x) * f.cos(), mi * cis(x) * f.sin()),
        StrongForm::FirstOrder => (cis(-x), mi * cis(x) * f),
    };
    PropagatorEntries { t, alpha, beta }
}

/// Variants of the weak-driving (`λ_Ω ≪ 1`) expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakVariant {
    /// First order in `λ_Ω`, any `λ_ω` away from the resonance `λ_ω = 2`.
    General,
    /// Additionally first order in `λ_ω`.
    LowFrequency,
    /// Expansion of the adiabatic propagator.
    Adiabatic,
}

/// Half-width of the excluded window around `λ_ω = 2` for [`WeakVariant::General`].
pub const RESONANCE_GUARD: f64 = 1e-6;

/// Weak-driving approximation of the propagator.
pub fn weak_driving_expansion<T: Real>(t: T, p: &DriveParams<T>, variant: WeakVariant) -> Result<PropagatorEntries<T>> {
    let x = t * p.omega0();
    let lr = p.lambda_rabi();
    let lw = p.lambda_drive();
    let half = lit::<T>(0.5);
    let i = imag_unit::<T>();
    let beta = match variant {
        WeakVariant::General => {
            let two = lit::<T>(2.0);
            if (lw - two).abs() < lit(RESONANCE_GUARD) {
                return Err(Error::Resonance { drive_ratio: lw.to_f64().unwrap_or(f64::NAN) });
            }
            let one = creal(T::one());
            let below = (cis(-(lw - two) * x) - one) / (lw - two);
            let above = (cis((lw + two) * x) - one) / (lw + two);
            i * cis(-x) * (below + above) * (half * lr)
        }
        WeakVariant::LowFrequency => {
            let s = (lw * x).sin();
            let c = (lw * x).cos();
            -cis(x) * (half * lr * s) + i * (cis(-x) - cis(x) * c) * (lit::<T>(0.25) * lr * lw)
        }
        WeakVariant::Adiabatic => -cis(x) * (half * lr * (lw * x).sin()),
    };
    Ok(PropagatorEntries { t, alpha: cis(-x), beta })
}

/// Outcome of one run of the adiabatic convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint<T> {
    pub g: T,
    /// Largest entrywise deviation between the exact and the adiabatic
    /// propagator over rescaled times `τ = g²t ∈ [0, τ*]`.
    pub deviation: T,
}

/// Weak-coupling rescaling experiment for the propagator.
///
/// Rescaled parameters `(ω₀, Ω, ω_R)` are held fixed. The physical drive
/// frequency is `ω = g² ω_R`, and the exact propagator is integrated up to
/// `t = τ*/g²`. The adiabatic propagator of the rescaled Hamiltonian is the
/// reference.
pub fn adiabatic_convergence<T: Real>(
    omega0: T,
    rabi: T,
    omega_r: T,
    g: T,
    tau_star: T,
    dt: T,
) -> Result<ConvergencePoint<T>> {
    if !(g > T::zero()) {
        return Err(invalid("g", "must be positive"));
    }
    let g2 = g * g;
    let p = DriveParams::new(omega0, rabi, omega_r * g2)?;
    let t_end = tau_star / g2;
    check_step(&p, dt)?;
    let grid = TimeGrid::new(t_end, dt, 1)?;
    let energies: Vec<T> = (0..=grid.steps).map(|k| p.energy(grid.time(k))).collect();
    let phase = cumulative_simpson(&energies, dt);
    let (mut a, mut b) = (creal(T::one()), creal(T::zero()));
    let mut worst = T::zero();
    for k in 0..grid.steps {
        (a, b) = rk4_step(grid.time(k), dt, a, b, &p);
        let t = grid.time(k + 1);
        let exact = PropagatorEntries { t, alpha: a, beta: b };
        worst = worst.max(exact.max_deviation(&adiabatic_entries(t, phase[k + 1], &p)));
    }
    Ok(ConvergencePoint { g, deviation: worst })
}
