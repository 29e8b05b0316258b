//! Fixed-size 2×2 complex algebra, validated qubit states and the driven
//! qubit Hamiltonian `ω₀σ_z + Ω sin(ωt)σ_x`.
//!
//! Basis convention: index 0 is the excited state `|e₀⟩ = (1, 0)` of
//! `H_S(0) = ω₀σ_z`, index 1 the ground state `|g₀⟩`. `σ₊ = |e₀⟩⟨g₀|`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, lit, tol, Real, C};

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex2x2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Real> Complex2x2<T> {
    pub fn new(m00: C<T>, m01: C<T>, m10: C<T>, m11: C<T>) -> Self {
        Self { m: [[m00, m01], [m10, m11]] }
    }

    pub fn zero() -> Self {
        let z = creal(T::zero());
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let (z, o) = (creal(T::zero()), creal(T::one()));
        Self::new(o, z, z, o)
    }

    pub fn sigma_x() -> Self {
        let (z, o) = (creal(T::zero()), creal(T::one()));
        Self::new(z, o, o, z)
    }

    pub fn sigma_y() -> Self {
        let z = creal(T::zero());
        let i = cplx(T::zero(), T::one());
        Self::new(z, -i, i, z)
    }

    pub fn sigma_z() -> Self {
        let (z, o) = (creal(T::zero()), creal(T::one()));
        Self::new(o, z, z, -o)
    }

    /// Raising operator `|e₀⟩⟨g₀|`.
    pub fn sigma_plus() -> Self {
        let (z, o) = (creal(T::zero()), creal(T::one()));
        Self::new(z, o, z, z)
    }

    /// Lowering operator `|g₀⟩⟨e₀|`.
    pub fn sigma_minus() -> Self {
        let (z, o) = (creal(T::zero()), creal(T::one()));
        Self::new(z, z, o, z)
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: [C<T>; 2], v: [C<T>; 2]) -> Self {
        Self::new(u[0] * v[0].conj(), u[0] * v[1].conj(), u[1] * v[0].conj(), u[1] * v[1].conj())
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self::new(f(self.m[0][0]), f(self.m[0][1]), f(self.m[1][0]), f(self.m[1][1]))
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m[0][0].conj(), self.m[1][0].conj(), self.m[0][1].conj(), self.m[1][1].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn trace(&self) -> C<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: [C<T>; 2], v: [C<T>; 2]) -> C<T> {
        let mv = self.apply(v);
        u[0].conj() * mv[0] + u[1].conj() * mv[1]
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.m.iter().flatten().map(|x| x.norm()).fold(T::zero(), T::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        (*self - self.adjoint()).max_abs()
    }

    /// Pauli-basis components `(c₀, cx, cy, cz)` with `M = c₀ I + c·σ`.
    pub fn pauli_components(&self) -> [C<T>; 4] {
        let half = lit::<T>(0.5);
        let i = cplx(T::zero(), T::one());
        let [[a, b], [c, d]] = self.m;
        [(a + d) * half, (b + c) * half, (b - c) * i * half, (a - d) * half]
    }

    /// Eigen-decomposition of a Hermitian matrix.
    ///
    /// Returns `([λ_low, λ_high], [v_low, v_high])` with normalized
    /// eigenvectors. Only the Hermitian part of `self` is used.
    pub fn hermitian_eigen(&self) -> ([T; 2], [[C<T>; 2]; 2]) {
        let half = lit::<T>(0.5);
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = (self.m[0][1] + self.m[1][0].conj()) * half;
        let mean = (a + d) * half;
        let r = ((a - d) * half).hypot(b.norm());
        let (lo, hi) = (mean - r, mean + r);
        if b.norm() <= T::epsilon() * (a.abs() + d.abs() + T::min_positive_value()) {
            let e0 = [creal(T::one()), creal(T::zero())];
            let e1 = [creal(T::zero()), creal(T::one())];
            return if a >= d { ([d, a], [e1, e0]) } else { ([a, d], [e0, e1]) };
        }
        let vec_for = |lam: T| -> [C<T>; 2] {
            // rows of (A - λ): (a-λ, b) and (b*, d-λ); take the larger null vector
            let from_row0 = [b, creal(lam - a)];
            let from_row1 = [creal(lam - d), b.conj()];
            let n0 = from_row0[0].norm_sqr() + from_row0[1].norm_sqr();
            let n1 = from_row1[0].norm_sqr() + from_row1[1].norm_sqr();
            let (v, n) = if n0 >= n1 { (from_row0, n0) } else { (from_row1, n1) };
            let n = n.sqrt();
            [v[0] / n, v[1] / n]
        };
        ([lo, hi], [vec_for(lo), vec_for(hi)])
    }
}

impl<T: Real> Add for Complex2x2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.m[0][0] + o.m[0][0], self.m[0][1] + o.m[0][1], self.m[1][0] + o.m[1][0], self.m[1][1] + o.m[1][1])
    }
}

impl<T: Real> AddAssign for Complex2x2<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Complex2x2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.m[0][0] - o.m[0][0], self.m[0][1] - o.m[0][1], self.m[1][0] - o.m[1][0], self.m[1][1] - o.m[1][1])
    }
}

impl<T: Real> Neg for Complex2x2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Real> Mul for Complex2x2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let a = &self.m;
        let b = &o.m;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl<T: Real> Mul<C<T>> for Complex2x2<T> {
    type Output = Self;
    fn mul(self, s: C<T>) -> Self {
        self.scale(s)
    }
}

impl<T: Real> Index<(usize, usize)> for Complex2x2<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.m[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Complex2x2<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.m[i][j]
    }
}

/// Hermiticity tolerance (max entry of `ρ − ρ†`).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unit-trace tolerance.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Validated qubit density matrix.
///
/// Validation happens once at construction; [`DensityMatrix2::recheck`]
/// re-runs it on demand. Propagation code may build unchecked states via
/// [`DensityMatrix2::from_raw`] and re-validate at checkpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2<T> {
    matrix: Complex2x2<T>,
}

impl<T: Real> DensityMatrix2<T> {
    pub fn new(matrix: Complex2x2<T>) -> Result<Self> {
        let rho = Self { matrix };
        rho.recheck()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(matrix: Complex2x2<T>) -> Self {
        Self { matrix }
    }

    pub fn recheck(&self) -> Result<()> {
        let herm = self.matrix.hermiticity_defect();
        if !(herm < tol(HERMITICITY_TOL)) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {:e})", herm.to_f64().unwrap_or(f64::NAN))));
        }
        let tr = self.matrix.trace();
        if !((tr.re - T::one()).abs() < lit(TRACE_TOL)) || !(tr.im.abs() < lit(TRACE_TOL)) {
            return Err(Error::InvalidState(format!("trace {} != 1", tr.re.to_f64().unwrap_or(f64::NAN))));
        }
        let lmin = self.min_eigenvalue();
        if !(lmin >= -tol::<T>(POSITIVITY_TOL)) {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                lmin.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(())
    }

    /// `(I + n·σ)/2`; valid for `|n| ≤ 1`.
    pub fn from_bloch(n: [T; 3]) -> Result<Self> {
        let half = lit::<T>(0.5);
        let m = Complex2x2::identity()
            + Complex2x2::sigma_x().scale_re(n[0])
            + Complex2x2::sigma_y().scale_re(n[1])
            + Complex2x2::sigma_z().scale_re(n[2]);
        Self::new(m.scale_re(half))
    }

    pub fn pure(psi: [C<T>; 2]) -> Result<Self> {
        let n = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let psi = [psi[0] / n, psi[1] / n];
        Self::new(Complex2x2::outer(psi, psi))
    }

    pub fn maximally_mixed() -> Self {
        Self { matrix: Complex2x2::identity().scale_re(lit(0.5)) }
    }

    /// Gibbs state of `H_S(0) = ω₀σ_z` at temperature `ts`.
    pub fn thermal(omega0: T, ts: T) -> Result<Self> {
        if !(ts > T::zero()) {
            return Err(crate::error::invalid("T_S", "system temperature must be positive"));
        }
        // p_e / p_g = exp(-2ω₀/T_S); tanh form avoids overflow at low T
        let sz = -(omega0 / ts).tanh();
        Self::from_bloch([T::zero(), T::zero(), sz])
    }

    /// `(|g₀⟩ + |e₀⟩)/√2`.
    pub fn superposition() -> Self {
        let h = creal(lit::<T>(0.5));
        Self { matrix: Complex2x2::new(h, h, h, h) }
    }

    pub fn matrix(&self) -> &Complex2x2<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Complex2x2<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> T {
        (self.matrix * self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> T {
        self.matrix.hermitian_eigen().0[0]
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> [T; 3] {
        let ex = |op: Complex2x2<T>| (op * self.matrix).trace().re;
        [ex(Complex2x2::sigma_x()), ex(Complex2x2::sigma_y()), ex(Complex2x2::sigma_z())]
    }
}

/// Drive parameters of `H_S(t) = ω₀σ_z + Ω sin(ωt)σ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams<T> {
    omega0: T,
    rabi: T,
    drive: T,
}

impl<T: Real> DriveParams<T> {
    pub fn new(omega0: T, rabi: T, drive: T) -> Result<Self> {
        if !(omega0 > T::zero()) || !omega0.is_finite() {
            return Err(crate::error::invalid("omega0", "must be positive"));
        }
        if !(rabi >= T::zero()) || !rabi.is_finite() {
            return Err(crate::error::invalid("Omega", "must be non-negative"));
        }
        if !(drive > T::zero()) || !drive.is_finite() {
            return Err(crate::error::invalid("omega", "must be positive"));
        }
        Ok(Self { omega0, rabi, drive })
    }

    /// Parameters in units of `ω₀ = 1` from `λ_Ω = Ω/ω₀` and `λ_ω = ω/ω₀`.
    pub fn from_ratios(lambda_rabi: T, lambda_drive: T) -> Result<Self> {
        Self::new(T::one(), lambda_rabi, lambda_drive)
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    /// Rabi frequency `Ω`.
    pub fn rabi(&self) -> T {
        self.rabi
    }

    /// Drive frequency `ω`.
    pub fn drive(&self) -> T {
        self.drive
    }

    pub fn lambda_rabi(&self) -> T {
        self.rabi / self.omega0
    }

    pub fn lambda_drive(&self) -> T {
        self.drive / self.omega0
    }

    /// Adiabatic parameter `λ = λ_Ω λ_ω`.
    pub fn lambda(&self) -> T {
        self.lambda_rabi() * self.lambda_drive()
    }

    /// Natural time unit `t_s = 1/ω₀`.
    pub fn t_s(&self) -> T {
        T::one() / self.omega0
    }

    /// Drive period `2π/ω`.
    pub fn period(&self) -> T {
        T::TAU() / self.drive
    }

    /// Transverse field `h(t) = Ω sin(ωt)`.
    pub fn field(&self, t: T) -> T {
        self.rabi * (self.drive * t).sin()
    }

    /// Instantaneous energy `E(t) = √(ω₀² + h(t)²)`.
    pub fn energy(&self, t: T) -> T {
        self.omega0.hypot(self.field(t))
    }
}

/// Instantaneous spectral data of `H_S(t)`: eigenvalues `±E`, gap `2E` and
/// mixing angle `φ` with `tan φ = Ω sin(ωt)/ω₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSnapshot<T> {
    pub t: T,
    pub energy: T,
    pub gap: T,
    pub phi: T,
}

impl<T: Real> SpectralSnapshot<T> {
    /// `|e_t⟩ = (cos φ/2, sin φ/2)`.
    pub fn excited(&self) -> [C<T>; 2] {
        let half = self.phi * lit(0.5);
        [creal(half.cos()), creal(half.sin())]
    }

    /// `|g_t⟩ = (−sin φ/2, cos φ/2)`.
    pub fn ground(&self) -> [C<T>; 2] {
        let half = self.phi * lit(0.5);
        [creal(-half.sin()), creal(half.cos())]
    }
}

pub fn hamiltonian<T: Real>(t: T, p: &DriveParams<T>) -> Complex2x2<T> {
    Complex2x2::sigma_z().scale_re(p.omega0) + Complex2x2::sigma_x().scale_re(p.field(t))
}

pub fn spectral_snapshot<T: Real>(t: T, p: &DriveParams<T>) -> SpectralSnapshot<T> {
    let h = p.field(t);
    let energy = p.omega0.hypot(h);
    SpectralSnapshot { t, energy, gap: energy + energy, phi: h.atan2(p.omega0) }
}

/// Observables reported along every trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    /// `⟨e_t|ρ|e_t⟩`.
    pub excited_population: T,
    /// `|⟨e_t|ρ|g_t⟩|`.
    pub coherence: T,
    pub sx: T,
    pub sy: T,
    pub sz: T,
    pub purity: T,
}

pub fn observables<T: Real>(rho: &DensityMatrix2<T>, t: T, p: &DriveParams<T>) -> Observables<T> {
    observables_in(rho, &spectral_snapshot(t, p))
}

pub fn observables_in<T: Real>(rho: &DensityMatrix2<T>, snap: &SpectralSnapshot<T>) -> Observables<T> {
    let (e, g) = (snap.excited(), snap.ground());
    let m = rho.matrix();
    let [sx, sy, sz] = rho.bloch();
    Observables {
        excited_population: m.sandwich(e, e).re,
        coherence: m.sandwich(e, g).norm(),
        sx,
        sy,
        sz,
        purity: rho.purity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    type M = Complex2x2<f64>;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (M::sigma_x(), M::sigma_y(), M::sigma_z());
        let i2 = Complex64::new(0.0, 2.0);
        assert_eq!(x.commutator(&y), z.scale(i2));
        assert_eq!(y.commutator(&z), x.scale(i2));
        assert_eq!(x.anticommutator(&x), M::identity().scale_re(2.0));
        assert_eq!((x * y * z).trace(), Complex64::new(0.0, 2.0));
        assert_eq!(z.det(), Complex64::new(-1.0, 0.0));
        assert_eq!(M::sigma_plus() + M::sigma_minus(), x);
        let c = (x.scale_re(0.3) + y.scale_re(-0.2) + z.scale_re(0.7)).pauli_components();
        assert_abs_diff_eq!(c[1].re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2].re, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c[3].re, 0.7, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_at_origin_is_static() {
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        assert_eq!(hamiltonian(0.0, &p), M::sigma_z());
    }

    #[test]
    fn hamiltonian_at_quarter_period() {
        let p = DriveParams::from_ratios(1.0, 3.0).unwrap();
        let t = std::f64::consts::FRAC_PI_2 / 3.0;
        let h = hamiltonian(t, &p);
        assert!((h - (M::sigma_z() + M::sigma_x())).max_abs() < 1e-15);
        let (ev, _) = h.hermitian_eigen();
        assert_abs_diff_eq!(ev[1], 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(ev[0], -2f64.sqrt(), epsilon = 1e-14);
        let s = spectral_snapshot(t, &p);
        assert_abs_diff_eq!(s.energy, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.phi, std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn snapshot_at_origin() {
        let p = DriveParams::from_ratios(0.7, 2.0).unwrap();
        let s = spectral_snapshot(0.0, &p);
        assert_eq!((s.energy, s.gap, s.phi), (1.0, 2.0, 0.0));
    }

    #[test]
    fn invalid_drive_rejected() {
        assert!(DriveParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DriveParams::new(1.0, -1.0, 1.0).is_err());
        assert!(DriveParams::new(1.0, 1.0, 0.0).is_err());
        let p = DriveParams::new(2.0, 3.0, 5.0).unwrap();
        assert_eq!(p.lambda(), p.lambda_rabi() * p.lambda_drive());
    }

    #[test]
    fn density_validation() {
        let bad = M::identity().scale_re(0.505);
        assert!(DensityMatrix2::new(bad).is_err());
        let nonherm = M::new(
            Complex64::new(0.5, 0.0),
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(DensityMatrix2::new(nonherm).is_err());
        assert!(DensityMatrix2::from_bloch([0.0, 0.0, 1.2]).is_err());
        assert!(DensityMatrix2::from_bloch([0.6, 0.0, 0.8]).is_ok());
    }

    #[test]
    fn observables_of_reference_states() {
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let e0 = DensityMatrix2::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let o = observables(&e0, 0.0, &p);
        assert_abs_diff_eq!(o.excited_population, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.coherence, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.sz, 1.0, epsilon = 1e-15);

        let mixed = DensityMatrix2::<f64>::maximally_mixed();
        for t in [0.0, 0.1, 0.37, 2.0] {
            let o = observables(&mixed, t, &p);
            assert_abs_diff_eq!(o.excited_population, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(o.coherence, 0.0, epsilon = 1e-15);
        }

        let plus = DensityMatrix2::<f64>::superposition();
        let o = observables(&plus, 0.0, &p);
        assert_abs_diff_eq!(o.excited_population, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(o.coherence, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(o.sx, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_state_populations() {
        let rho = DensityMatrix2::thermal(1.0, 0.5).unwrap();
        let pe = rho.matrix()[(0, 0)].re;
        let pg = rho.matrix()[(1, 1)].re;
        assert_abs_diff_eq!(pe / pg, (-2.0f64 / 0.5).exp(), epsilon = 1e-14);
        assert!(DensityMatrix2::thermal(1.0, 0.0).is_err());
    }

    #[test]
    fn single_precision_smoke() {
        let p = DriveParams::<f32>::from_ratios(1.0, 10.0).unwrap();
        let h = hamiltonian(0.3f32, &p);
        assert!(h.hermiticity_defect() < 1e-6);
        assert!(h.trace().norm() < 1e-6);
    }
}
