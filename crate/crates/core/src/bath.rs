//! Ohmic bosonic bath: spectral density, correlation functions, dissipation
//! rates, Lamb-shift coefficients and the Markov integrability constant.
//!
//! Units: `ħ = k_B = 1`, energies and temperatures share the unit of `ω₀`.

use crate::error::{invalid, Error, Result};
use crate::qubit::DriveParams;
use crate::quadrature::{integrate, principal_value, Estimate, QuadratureConfig};
use crate::scalar::{cplx, from_usize, lit, Real, C};
use crate::special::trigamma;

/// Ohmic spectral density `J(w) = a w e^{−w/w_c}` at bath temperature `T_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec<T> {
    coupling: T,
    cutoff: T,
    temperature: T,
}

impl<T: Real> BathSpec<T> {
    pub fn new(coupling: T, cutoff: T, temperature: T) -> Result<Self> {
        if !(coupling > T::zero()) || !coupling.is_finite() {
            return Err(invalid("a", "coupling must be positive"));
        }
        if !(cutoff > T::zero()) || !cutoff.is_finite() {
            return Err(invalid("w_c", "cutoff must be positive"));
        }
        if !(temperature > T::zero()) || !temperature.is_finite() {
            return Err(invalid("T_B", "bath temperature must be positive (zero temperature is not supported)"));
        }
        Ok(Self { coupling, cutoff, temperature })
    }

    /// Dimensionless coupling `a`.
    pub fn coupling(&self) -> T {
        self.coupling
    }

    /// Cutoff frequency `w_c`.
    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    /// Bath temperature `T_B`.
    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn beta(&self) -> T {
        T::one() / self.temperature
    }

    pub fn with_coupling(&self, coupling: T) -> Result<Self> {
        Self::new(coupling, self.cutoff, self.temperature)
    }

    fn density_unchecked(&self, w: T) -> T {
        self.coupling * w * (-w / self.cutoff).exp()
    }

    /// `J(w) n̄(w)`, regular at `w → 0`.
    fn density_times_occupation(&self, w: T) -> T {
        let tb = self.temperature;
        if w < lit::<T>(1e-6) * tb {
            let half = lit::<T>(0.5);
            self.coupling * tb * (T::one() - w * half / tb) * (-w / self.cutoff).exp()
        } else {
            self.density_unchecked(w) * bose_occupation(w, tb)
        }
    }

    /// `J(w) (1 + 2 n̄(w)) = J(w) coth(w / 2T_B)`, regular at `w → 0`.
    fn density_times_coth(&self, w: T) -> T {
        let tb = self.temperature;
        if w < lit::<T>(1e-6) * tb {
            let x = w / tb;
            // w coth(w/2T) = 2T (1 + x²/12 + ...)
            self.coupling * (tb + tb) * (T::one() + x * x / lit(12.0)) * (-w / self.cutoff).exp()
        } else {
            self.density_unchecked(w) + lit::<T>(2.0) * self.density_times_occupation(w)
        }
    }
}

/// Bose–Einstein occupation `1/(e^{w/T} − 1)`.
pub fn bose_occupation<T: Real>(w: T, temperature: T) -> T {
    T::one() / (w / temperature).exp_m1()
}

pub fn spectral_density<T: Real>(w: T, b: &BathSpec<T>) -> Result<T> {
    if !(w >= T::zero()) {
        return Err(invalid("w", "spectral density is defined for w >= 0"));
    }
    Ok(b.density_unchecked(w))
}

/// Dissipation rates of the dephasing (`γ₀`), absorption (`γ₊`) and
/// emission (`γ₋`) channels at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple<T> {
    pub t: T,
    pub gamma0: T,
    pub gamma_plus: T,
    pub gamma_minus: T,
}

pub fn rates<T: Real>(t: T, p: &DriveParams<T>, b: &BathSpec<T>) -> RateTriple<T> {
    rates_at_energy(t, p.energy(t), b)
}

/// Rates for a known instantaneous energy `E(t)`.
pub fn rates_at_energy<T: Real>(t: T, energy: T, b: &BathSpec<T>) -> RateTriple<T> {
    let two_pi = T::TAU();
    let gap = energy + energy;
    let j = b.density_unchecked(gap);
    let n = bose_occupation(gap, b.temperature);
    RateTriple {
        t,
        gamma0: lit::<T>(2.0) * two_pi * b.coupling * b.temperature,
        gamma_plus: two_pi * j * n,
        gamma_minus: two_pi * j * (T::one() + n),
    }
}

/// Bath correlation function `R(t)` of the continuum, via the trigamma
/// representation `(a/β²)[ψ⁽¹⁾(1/(βw_c) + it/β) + ψ⁽¹⁾(1/(βw_c) − it/β + 1)]`.
pub fn correlation_continuum<T: Real>(t: T, b: &BathSpec<T>) -> C<T> {
    let beta = b.beta();
    let x = T::one() / (beta * b.cutoff);
    let y = t / beta;
    let z1 = cplx(x, y);
    let z2 = cplx(x + T::one(), -y);
    (trigamma(z1) + trigamma(z2)) * (b.coupling / (beta * beta))
}

/// `R(t) = ∫₀^∞ J(w)[coth(w/2T_B) cos(wt) − i sin(wt)] dw` by adaptive
/// quadrature up to `tail_cutoff_factor·w_c`.
pub fn correlation_quadrature<T: Real>(t: T, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<C<T>> {
    let upper = quad.tail_cutoff_factor * b.cutoff;
    let abs_tol = quad.rel_tol * b.coupling * b.cutoff * b.cutoff * lit(1e-3);
    let panels = quad.max_panels.max(5000);
    let re = integrate(|w: T| b.density_times_coth(w) * (w * t).cos(), T::zero(), upper, abs_tol, quad.rel_tol, panels)?;
    let im = integrate(|w: T| -b.density_unchecked(w) * (w * t).sin(), T::zero(), upper, abs_tol, quad.rel_tol, panels)?;
    Ok(cplx(re.value, im.value))
}

/// A discrete bath mode: frequency and coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub frequency: T,
    pub coupling: T,
}

/// Correlation function of a finite set of modes,
/// `Σ_j g_j²/(1 − e^{−w_j/T}) (e^{−iw_j t} + e^{iw_j t − w_j/T})`.
pub fn correlation_discrete<T: Real>(t: T, modes: &[Mode<T>], temperature: T) -> Result<C<T>> {
    let mut acc = cplx(T::zero(), T::zero());
    for m in modes {
        if !(m.frequency > T::zero()) {
            return Err(invalid("w_j", "mode frequencies must be positive"));
        }
        let occ = bose_occupation(m.frequency, temperature);
        let g2 = m.coupling * m.coupling;
        let wt = m.frequency * t;
        // g²/(1 − e^{−w/T}) = g²(1 + n̄) and g² e^{−w/T}/(1 − e^{−w/T}) = g² n̄
        acc = acc + cplx(wt.cos(), -wt.sin()) * (g2 * (T::one() + occ)) + cplx(wt.cos(), wt.sin()) * (g2 * occ);
    }
    Ok(acc)
}

/// Lamb-shift coefficients at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambCoeffs<T> {
    pub t: T,
    /// `S(t) = ∫ J (1+2n̄) [1/(w+2E) − PV 1/(w−2E)] dw`.
    pub s_t: T,
    /// Coefficient of the zero-frequency channel, `−PV ∫ J(w)/w dw = −a w_c`.
    pub s0: T,
}

fn spectral_upper_limit<T: Real>(pole: T, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> T {
    pole + quad.tail_cutoff_factor * b.cutoff
}

/// Bound on `∫_L^∞ J(w)(1+2n̄(w)) · 2w*/(w² − w*²) dw` for `L > w*`.
fn kernel_tail<T: Real>(limit: T, pole: T, b: &BathSpec<T>) -> T {
    let two = lit::<T>(2.0);
    let weight = b.density_times_coth(limit) / limit;
    // J(w)(1+2n̄)/w decays no slower than e^{-w/w_c}·coth(L/2T)
    weight * b.cutoff * two * pole * limit / (limit * limit - pole * pole)
}

fn lamb_abs_tol<T: Real>(b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> T {
    quad.rel_tol * b.coupling * b.cutoff
}

/// `S` as a function of the instantaneous energy `E`.
pub fn lamb_coefficient<T: Real>(energy: T, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<Estimate<T>> {
    quad.validate()?;
    if !(energy > T::zero()) {
        return Err(invalid("E", "instantaneous energy must be positive"));
    }
    let pole = energy + energy;
    let upper = spectral_upper_limit(pole, b, quad);
    let tol = lamb_abs_tol(b, quad);
    let f = |w: T| b.density_times_coth(w);
    let regular = integrate(|w| f(w) / (w + pole), T::zero(), upper, tol, quad.rel_tol, quad.max_panels)?;
    let singular = principal_value(f, T::zero(), upper, pole, quad.pv_epsilon, tol, quad.rel_tol, quad.max_panels)?;
    let tail = kernel_tail(upper, pole, b);
    let value = regular.value - singular.value;
    let error = regular.error + singular.error + tail;
    let allowed = tol.max(quad.rel_tol * value.abs()) * lit(10.0);
    if error > allowed {
        return Err(Error::Quadrature {
            estimate: error.to_f64().unwrap_or(f64::NAN),
            tolerance: allowed.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(Estimate { value, error, panels: regular.panels + singular.panels })
}

/// The two frequency-resolved coefficients `(S₊, S₋)` of the `∓2E` Bohr
/// channels, as they appear before being combined.
///
/// They satisfy `S₊ − S₋ = −S` with `S` from [`lamb_coefficient`].
pub fn lamb_split<T: Real>(energy: T, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<(T, T)> {
    quad.validate()?;
    let pole = energy + energy;
    let upper = spectral_upper_limit(pole, b, quad);
    let tol = lamb_abs_tol(b, quad);
    let emit = |w: T| b.density_unchecked(w) + b.density_times_occupation(w);
    let absorb = |w: T| b.density_times_occupation(w);
    let pv = |g: &dyn Fn(T) -> T| principal_value(g, T::zero(), upper, pole, quad.pv_epsilon, tol, quad.rel_tol, quad.max_panels);
    let reg = |g: &dyn Fn(T) -> T| integrate(|w| g(w) / (w + pole), T::zero(), upper, tol, quad.rel_tol, quad.max_panels);
    // S₊ = ∫ J [−(1+n̄)/(w+2E) + n̄ PV 1/(w−2E)]
    let s_plus = -reg(&emit)?.value + pv(&absorb)?.value;
    // S₋ = ∫ J [−(1+n̄) PV 1/(w−2E) + n̄/(w+2E)]
    let s_minus = -pv(&emit)?.value + reg(&absorb)?.value;
    Ok((s_plus, s_minus))
}

pub fn lamb_shift<T: Real>(t: T, p: &DriveParams<T>, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<LambCoeffs<T>> {
    let s_t = lamb_coefficient(p.energy(t), b, quad)?.value;
    Ok(LambCoeffs { t, s_t, s0: -b.coupling * b.cutoff })
}

/// Memoized `S(E)` on a uniform energy grid over `[ω₀, √(ω₀² + Ω²)]` with
/// four-point cubic interpolation.
///
/// Immutable after construction, so a table can be shared across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct LambShiftTable<T> {
    e_min: T,
    step: T,
    values: Vec<T>,
    s0: T,
}

impl<T: Real> LambShiftTable<T> {
    /// Interpolation error target relative to `ω₀`.
    pub const TARGET: f64 = 1e-8;

    pub fn build(p: &DriveParams<T>, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<Self> {
        let e_min = p.omega0();
        let e_max = p.omega0().hypot(p.rabi());
        let s0 = -b.coupling * b.cutoff;
        let eval = |e: T| lamb_coefficient(e, b, quad).map(|est| est.value);
        if !(e_max > e_min * (T::one() + lit(1e-12))) {
            let v = eval(e_min)?;
            return Ok(Self { e_min, step: T::zero(), values: vec![v], s0 });
        }
        let target = lit::<T>(Self::TARGET) * p.omega0();
        let mut intervals = 16usize;
        loop {
            let step = (e_max - e_min) / from_usize(intervals);
            let values = (0..=intervals).map(|k| eval(e_min + step * from_usize(k))).collect::<Result<Vec<_>>>()?;
            let table = Self { e_min, step, values, s0 };
            // probe midpoints across the range
            let probes = [0usize, 1, intervals / 3, intervals / 2, (2 * intervals) / 3, intervals - 2, intervals - 1];
            let mut worst = T::zero();
            for &k in &probes {
                let e = e_min + step * (from_usize::<T>(k) + lit(0.5));
                worst = worst.max((table.at_energy(e) - eval(e)?).abs());
            }
            if worst < target || intervals >= 4096 {
                return Ok(table);
            }
            intervals *= 2;
        }
    }

    pub fn s0(&self) -> T {
        self.s0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at_energy(&self, energy: T) -> T {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let x = ((energy - self.e_min) / self.step).max(T::zero());
        let last = n - 1;
        let k = x.floor().to_usize().unwrap_or(0).min(last - 1);
        // stencil k-1..k+2 shifted to stay inside the table
        let m = n.min(4);
        let start = k.saturating_sub(1).min(n - m);
        let mut acc = T::zero();
        for i in 0..m {
            let xi = from_usize::<T>(start + i);
            let mut w = T::one();
            for j in 0..m {
                if i != j {
                    let xj = from_usize::<T>(start + j);
                    w = w * (x - xj) / (xi - xj);
                }
            }
            acc = acc + w * self.values[start + i];
        }
        acc
    }

    pub fn coeffs(&self, t: T, p: &DriveParams<T>) -> LambCoeffs<T> {
        LambCoeffs { t, s_t: self.at_energy(p.energy(t)), s0: self.s0 }
    }
}

/// Integrability constant `C = ∫₀^∞ |R(t)| dt` of the bath correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovConstant<T> {
    /// Total estimate, numerical part plus tail bound.
    pub value: T,
    /// `∫₀^{t_max} |R|`.
    pub bulk: T,
    /// Bound on `∫_{t_max}^∞ |R|` from the `O(t⁻²)` decay.
    pub tail_bound: T,
    pub t_max: T,
}

/// Default horizon for [`markov_constant`]: `100 β`.
pub fn default_markov_horizon<T: Real>(b: &BathSpec<T>) -> T {
    lit::<T>(100.0) * b.beta()
}

pub fn markov_constant<T: Real>(b: &BathSpec<T>, t_max: T, quad: &QuadratureConfig<T>) -> Result<MarkovConstant<T>> {
    quad.validate()?;
    if !(t_max > T::zero()) {
        return Err(invalid("t_max", "must be positive"));
    }
    let abs = |t: T| correlation_continuum(t, b).norm();
    let scale = abs(T::zero()) * b.beta();
    let tol = quad.rel_tol * scale;
    let quarter = t_max * lit(0.25);
    let half = t_max * lit(0.5);
    let head = integrate(abs, T::zero(), quarter, tol, quad.rel_tol, quad.max_panels)?;
    let mid = integrate(abs, quarter, half, tol, quad.rel_tol, quad.max_panels)?;
    let last = integrate(abs, half, t_max, tol, quad.rel_tol, quad.max_panels)?;
    // an integrable t⁻² tail halves the increment per octave; t⁻¹ would not
    if last.value > lit::<T>(0.75) * mid.value && last.value > tol {
        return Err(Error::Divergence { increment: last.value.to_f64().unwrap_or(f64::NAN) });
    }
    let samples = 64usize;
    let mut k_max = T::zero();
    for i in 0..=samples {
        let t = half + (t_max - half) * from_usize::<T>(i) / from_usize::<T>(samples);
        k_max = k_max.max(t * t * abs(t));
    }
    let tail_bound = k_max / t_max;
    let bulk = head.value + mid.value + last.value;
    Ok(MarkovConstant { value: bulk + tail_bound, bulk, tail_bound, t_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn default_bath() -> BathSpec<f64> {
        BathSpec::new(5e-3, 2.0, 4.0).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        let b = default_bath();
        assert_eq!(spectral_density(0.0, &b).unwrap(), 0.0);
        assert_relative_eq!(spectral_density(2.0, &b).unwrap(), 5e-3 * 2.0 * (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(spectral_density(2.0, &b).unwrap(), 3.6787944117144e-3, max_relative = 1e-12);
        assert!(spectral_density(-0.1, &b).is_err());
        // maximum at w = w_c
        let jc = spectral_density(2.0, &b).unwrap();
        assert!(spectral_density(1.99, &b).unwrap() < jc && spectral_density(2.01, &b).unwrap() < jc);
    }

    #[test]
    fn spectral_density_total_weight() {
        let b = default_bath();
        let est = integrate(|w| spectral_density(w, &b).unwrap(), 0.0, 200.0, 1e-16, 1e-13, 200).unwrap();
        let exact = 5e-3 * 4.0;
        assert_relative_eq!(est.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn invalid_bath_rejected() {
        assert!(BathSpec::new(0.0, 1.0, 1.0).is_err());
        assert!(BathSpec::new(1e-3, 0.0, 1.0).is_err());
        assert!(BathSpec::new(1e-3, 1.0, 0.0).is_err());
    }

    #[test]
    fn rates_reference_values() {
        let b = default_bath();
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let r = rates(0.0, &p, &b);
        assert_relative_eq!(r.gamma0, 0.08 * std::f64::consts::PI, max_relative = 1e-15);
        assert_relative_eq!(r.gamma0, 0.25133, max_relative = 2e-5);
        // 2π J(2) (1 + 1/(e^{1/2} − 1)), evaluated independently
        let j = 5e-3 * 2.0 * (-1.0f64).exp();
        let expected = 2.0 * std::f64::consts::PI * j * (1.0 + 1.0 / (0.5f64.exp() - 1.0));
        assert_relative_eq!(r.gamma_minus, expected, max_relative = 1e-14);
        assert_relative_eq!(r.gamma_minus, 0.05875, max_relative = 5e-4);
        for t in [0.0, 0.1, 0.3, 1.7] {
            let r = rates(t, &p, &b);
            let ratio = r.gamma_plus / r.gamma_minus;
            assert!((ratio - (-2.0 * p.energy(t) / 4.0).exp()).abs() < 1e-12);
            assert!(r.gamma_minus > r.gamma_plus && r.gamma_plus > 0.0);
        }
    }

    fn quad_correlation(t: f64, b: &BathSpec<f64>) -> Complex64 {
        let q = QuadratureConfig { rel_tol: 1e-12, tail_cutoff_factor: 60.0, ..QuadratureConfig::default() };
        correlation_quadrature(t, b, &q).unwrap()
    }

    #[test]
    fn correlation_at_origin_is_real() {
        let b = default_bath();
        let r0 = correlation_continuum(0.0, &b);
        assert!(r0.im.abs() < 1e-15);
        let q = quad_correlation(0.0, &b);
        assert_relative_eq!(r0.re, q.re, max_relative = 1e-9);
    }

    #[test]
    fn discrete_correlation_limits() {
        let modes: [Mode<f64>; 2] = [Mode { frequency: 1.3, coupling: 0.2 }, Mode { frequency: 2.1, coupling: 0.05 }];
        let r0 = correlation_discrete(0.0, &modes, 0.7).unwrap();
        let expected: f64 = modes.iter().map(|m| m.coupling.powi(2) / (m.frequency / 1.4).tanh()).sum();
        assert!(r0.im.abs() < 1e-15);
        assert_relative_eq!(r0.re, expected, max_relative = 1e-14);
        let cold = correlation_discrete(0.9, &modes[..1], 1e-3).unwrap();
        let vac = Complex64::new(0.0, -1.3 * 0.9).exp() * 0.04;
        assert!((cold - vac).norm() < 1e-14);
        assert!(correlation_discrete(0.0, &[Mode { frequency: 0.0, coupling: 1.0 }], 1.0).is_err());
    }

    #[test]
    fn lamb_s0_closed_form() {
        let b = default_bath();
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let c = lamb_shift(0.3, &p, &b, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(c.s0, -0.01, max_relative = 1e-15);
        // −∫ J(w)/w dw numerically
        let num = integrate(|w| spectral_density(w, &b).unwrap() / w.max(1e-300), 1e-300, 100.0, 1e-16, 1e-13, 100).unwrap();
        assert_relative_eq!(-num.value, c.s0, max_relative = 1e-10);
    }

    /// Subtraction-route oracle: PV ∫_0^L f/(w−p) = ∫_0^L (f(w)−f(p))/(w−p) + f(p) ln((L−p)/p).
    fn lamb_by_subtraction(e: f64, b: &BathSpec<f64>) -> f64 {
        let p = 2.0 * e;
        let l = p + 60.0 * b.cutoff();
        let f = |w: f64| b.density_times_coth(w);
        let fp = f(p);
        let reg = integrate(|w| f(w) / (w + p), 0.0, l, 1e-15, 1e-13, 2000).unwrap().value;
        let sub = integrate(|w| if w == p { 0.0 } else { (f(w) - fp) / (w - p) }, 0.0, l, 1e-15, 1e-13, 2000).unwrap().value;
        reg - (sub + fp * ((l - p) / p).ln())
    }

    #[test]
    fn lamb_coefficient_matches_subtraction_oracle() {
        let b = default_bath();
        let q = QuadratureConfig::default();
        for e in [1.0, 1.2, std::f64::consts::SQRT_2] {
            let s = lamb_coefficient(e, &b, &q).unwrap().value;
            assert_relative_eq!(s, lamb_by_subtraction(e, &b), max_relative = 1e-8);
        }
    }

    #[test]
    fn lamb_independent_of_excision_width() {
        let b = default_bath();
        let mut q = QuadratureConfig::default();
        q.pv_epsilon = 1e-3;
        let a = lamb_coefficient(1.1, &b, &q).unwrap().value;
        q.pv_epsilon = 1e-4;
        let c = lamb_coefficient(1.1, &b, &q).unwrap().value;
        assert_relative_eq!(a, c, max_relative = 1e-6);
    }

    #[test]
    fn lamb_depends_on_energy_only() {
        let b = default_bath();
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let q = QuadratureConfig::default();
        let t1 = 0.013;
        let t2 = p.period() / 2.0 - t1; // sin(ωt₂) = sin(ωt₁)
        let t3 = p.period() / 2.0 + t1; // sin flips sign
        let s1 = lamb_shift(t1, &p, &b, &q).unwrap().s_t;
        let s2 = lamb_shift(t2, &p, &b, &q).unwrap().s_t;
        let s3 = lamb_shift(t3, &p, &b, &q).unwrap().s_t;
        assert_relative_eq!(s1, s2, max_relative = 1e-9);
        assert_relative_eq!(s1, s3, max_relative = 1e-9);
    }

    #[test]
    fn split_coefficients_combine_to_minus_s() {
        let b = default_bath();
        let q = QuadratureConfig::default();
        for e in [1.0, 1.3] {
            let (sp, sm) = lamb_split(e, &b, &q).unwrap();
            let s = lamb_coefficient(e, &b, &q).unwrap().value;
            assert_relative_eq!(sp - sm, -s, max_relative = 1e-8);
        }
    }

    #[test]
    fn lamb_table_interpolation_error() {
        let b = default_bath();
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let q = QuadratureConfig::default();
        let table = LambShiftTable::build(&p, &b, &q).unwrap();
        for k in 0..23 {
            let e = 1.0 + (2f64.sqrt() - 1.0) * (k as f64 + 0.37) / 23.0;
            let direct = lamb_coefficient(e, &b, &q).unwrap().value;
            assert!((table.at_energy(e) - direct).abs() < 1e-8, "E={e}");
        }
    }

    #[test]
    fn markov_constant_properties() {
        let b = default_bath();
        let q = QuadratureConfig::default();
        let c50 = markov_constant(&b, 50.0 * b.beta(), &q).unwrap();
        let c100 = markov_constant(&b, 100.0 * b.beta(), &q).unwrap();
        assert!(c100.value > 0.0);
        assert!(((c50.value - c100.value) / c100.value).abs() < 1e-2);
        let b2 = b.with_coupling(1e-2).unwrap();
        let c2 = markov_constant(&b2, 100.0 * b.beta(), &q).unwrap();
        assert_relative_eq!(c2.value, 2.0 * c100.value, max_relative = 1e-9);
    }
}
