//! Adaptive Gauss–Kronrod quadrature, Cauchy principal values and cumulative
//! Simpson integration on uniform grids.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Real};

/// Numerical settings for every integral the bath module evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Half-width of the symmetric window around a principal-value pole.
    /// Clamped to half the distance between the pole and the lower limit.
    pub pv_epsilon: T,
    pub rel_tol: T,
    pub max_panels: usize,
    /// Upper integration limit for spectral integrals, in units of the
    /// bath cutoff frequency beyond the largest pole.
    pub tail_cutoff_factor: T,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self { pv_epsilon: lit(0.5), rel_tol: lit(1e-10), max_panels: 2000, tail_cutoff_factor: lit(40.0) }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.pv_epsilon > T::zero()) {
            return Err(invalid("pv_epsilon", "must be positive"));
        }
        if !(self.rel_tol > T::zero()) {
            return Err(invalid("quad_rel_tol", "must be positive"));
        }
        if self.max_panels == 0 {
            return Err(invalid("quad_max_panels", "must be at least 1"));
        }
        if !(self.tail_cutoff_factor > T::zero()) {
            return Err(invalid("tail_cutoff_factor", "must be positive"));
        }
        Ok(())
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub panels: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980734575,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights at XGK[1], XGK[3], .., XGK[9]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// 21-point Kronrod rule with the embedded 10-point Gauss error estimate.
fn gk21<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let center = (a + b) * half;
    let hl = (b - a) * half;
    let fc = f(center);
    let mut kronrod = fc * lit(WGK[10]);
    let mut gauss = T::zero();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = hl * lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * lit(WG[j / 2]);
        }
    }
    let mean = kronrod * half;
    let mut asc = (fc - mean).abs() * lit(WGK[10]);
    for j in 0..10 {
        asc = asc + lit::<T>(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * hl;
    let asc = asc * hl.abs();
    let mut err = ((kronrod - gauss) * hl).abs();
    if asc != T::zero() && err != T::zero() {
        let r = (lit::<T>(200.0) * err / asc).powf(lit(1.5));
        err = asc * r.min(T::one());
    }
    (value, err)
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// Converges when the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`; otherwise returns [`Error::Quadrature`]
/// once `max_panels` panels are in use.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, abs_tol: T, rel_tol: T, max_panels: usize) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: T::zero(), panels: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("integration limits", "must be finite"));
    }
    let (value, error) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let half = lit::<T>(0.5);
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature {
                estimate: total_err.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = (worst.a + worst.b) * half;
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            // panel can no longer be split in this precision
            return Err(Error::Quadrature {
                estimate: total_err.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.error + e1 + e2;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated cancellation from the running updates
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error, panels: heap.len() })
}

/// Cauchy principal value `PV ∫_a^b f(w)/(w − pole) dw` with `a < pole < b`.
///
/// The window `[pole − δ, pole + δ]` is folded onto `∫_0^δ (f(pole+u) −
/// f(pole−u))/u du`, whose integrand is regular; the two outer pieces are
/// ordinary integrals.
pub fn principal_value<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    pole: T,
    half_width: T,
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Result<Estimate<T>> {
    if !(a < pole && pole < b) {
        return Err(invalid("pole", "must lie strictly inside the integration interval"));
    }
    let half = lit::<T>(0.5);
    let delta = half_width.min((pole - a) * half).min((b - pole) * half);
    if !(delta > T::zero()) {
        return Err(invalid("pv_epsilon", "must be positive"));
    }
    let third = abs_tol / lit(3.0);
    let left = integrate(|w| f(w) / (w - pole), a, pole - delta, third, rel_tol, max_panels)?;
    let mid = integrate(|u| (f(pole + u) - f(pole - u)) / u, T::zero(), delta, third, rel_tol, max_panels)?;
    let right = integrate(|w| f(w) / (w - pole), pole + delta, b, third, rel_tol, max_panels)?;
    Ok(Estimate {
        value: left.value + mid.value + right.value,
        error: left.error + mid.error + right.error,
        panels: left.panels + mid.panels + right.panels,
    })
}

/// Running integral `∫_{x₀}^{x_i} f` of samples on a uniform grid of step `h`.
///
/// Even indices use composite Simpson; odd indices add the last interval
/// with the four-point cubic rule on the neighbouring samples, so the whole
/// scheme is exact for cubics. Fewer than four samples fall back to lower
/// order rules.
pub fn cumulative_simpson<T: Real>(values: &[T], h: T) -> Vec<T> {
    let n = values.len();
    let mut out = vec![T::zero(); n];
    if n < 2 {
        return out;
    }
    let f = values;
    if n == 2 {
        out[1] = (f[0] + f[1]) * h * lit(0.5);
        return out;
    }
    let third = h / lit(3.0);
    let c = |x: f64| lit::<T>(x);
    if n == 3 {
        out[1] = h / c(12.0) * (c(5.0) * f[0] + c(8.0) * f[1] - f[2]);
        out[2] = third * (f[0] + c(4.0) * f[1] + f[2]);
        return out;
    }
    let h24 = h / c(24.0);
    for i in 1..n {
        out[i] = if i % 2 == 0 {
            out[i - 2] + third * (f[i - 2] + c(4.0) * f[i - 1] + f[i])
        } else if i == 1 {
            h24 * (c(9.0) * f[0] + c(19.0) * f[1] - c(5.0) * f[2] + f[3])
        } else {
            out[i - 1] + h24 * (f[i - 3] - c(5.0) * f[i - 2] + c(19.0) * f[i - 1] + c(9.0) * f[i])
        };
    }
    out
}
