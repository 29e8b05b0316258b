//! Regime checks for the time-dependent master equation.
//!
//! Every "much greater than" is read as a factor [`MARGIN`].

use crate::bath::{default_markov_horizon, markov_constant, BathSpec, MarkovConstant};
use crate::error::Result;
use crate::quadrature::QuadratureConfig;
use crate::qubit::DriveParams;
use crate::scalar::{lit, Real};

/// Factor separating the two sides of a strong inequality.
pub const MARGIN: f64 = 100.0;
/// Largest coupling accepted as weak.
pub const WEAK_COUPLING_MAX: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularCheck<T> {
    /// `2ω₀ / (a² C)`.
    pub margin: T,
    pub ok: bool,
}

/// Secular condition `min |w_k − w_p| = 2ω₀ ≫ a² C`.
///
/// `C` carries energy units, the same as `ω₀`.
pub fn check_secular<T: Real>(p: &DriveParams<T>, b: &BathSpec<T>, c: T) -> SecularCheck<T> {
    let a = b.coupling();
    let margin = (p.omega0() + p.omega0()) / (a * a * c);
    SecularCheck { margin, ok: margin > lit(MARGIN) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivingCheck<T> {
    /// `Ωω/(4ω₀²) = λ_Ω λ_ω / 4`.
    pub ratio: T,
    /// `a⁻²`.
    pub bound: T,
    /// `ratio < bound / 100`.
    pub driving_ok: bool,
    /// `ratio < 1/100`: the adiabatic master equation also applies.
    pub adiabatic_ok: bool,
}

pub fn check_driving<T: Real>(p: &DriveParams<T>, a: T) -> DrivingCheck<T> {
    let ratio = p.lambda() / lit(4.0);
    let bound = T::one() / (a * a);
    let m = lit::<T>(MARGIN);
    DrivingCheck { ratio, bound, driving_ok: ratio < bound / m, adiabatic_ok: ratio < T::one() / m }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport<T> {
    pub coupling: T,
    pub weak_coupling_ok: bool,
    pub markov: MarkovConstant<T>,
    pub secular: SecularCheck<T>,
    pub driving: DrivingCheck<T>,
}

impl<T: Real> ValidityReport<T> {
    /// Whether the TDME applies. The adiabatic flag is informational.
    pub fn passes(&self) -> bool {
        self.weak_coupling_ok && self.secular.ok && self.driving.driving_ok
    }

    /// `key = value` lines in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let f = |x: T| format!("{:.12e}", x.to_f64().unwrap_or(f64::NAN));
        vec![
            ("coupling_a", f(self.coupling)),
            ("weak_coupling_threshold", format!("{:.12e}", WEAK_COUPLING_MAX)),
            ("weak_coupling_ok", self.weak_coupling_ok.to_string()),
            ("markov_C", f(self.markov.value)),
            ("markov_C_tail_bound", f(self.markov.tail_bound)),
            ("markov_t_max", f(self.markov.t_max)),
            ("secular_margin", f(self.secular.margin)),
            ("secular_ok", self.secular.ok.to_string()),
            ("driving_ratio", f(self.driving.ratio)),
            ("driving_bound", f(self.driving.bound)),
            ("driving_ok", self.driving.driving_ok.to_string()),
            ("adiabatic_ok", self.driving.adiabatic_ok.to_string()),
            ("strong_inequality_factor", format!("{:.12e}", MARGIN)),
            ("valid", self.passes().to_string()),
        ]
    }
}

pub fn full_report<T: Real>(p: &DriveParams<T>, b: &BathSpec<T>, quad: &QuadratureConfig<T>) -> Result<ValidityReport<T>> {
    let markov = markov_constant(b, default_markov_horizon(b), quad)?;
    let a = b.coupling();
    Ok(ValidityReport {
        coupling: a,
        weak_coupling_ok: a <= lit(WEAK_COUPLING_MAX),
        markov,
        secular: check_secular(p, b, markov.value),
        driving: check_driving(p, a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_bath(a: f64) -> BathSpec<f64> {
        BathSpec::new(a, 2.0, 4.0).unwrap()
    }

    #[test]
    fn secular_margin_scaling() {
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let q = QuadratureConfig::default();
        let b = default_bath(5e-3);
        let c = markov_constant(&b, default_markov_horizon(&b), &q).unwrap().value;
        let small = check_secular(&p, &b, c);
        assert!(small.ok && small.margin > 1e4, "{}", small.margin);
        let strong = check_secular(&p, &default_bath(1.0), c);
        assert!((small.margin / strong.margin - 4e4).abs() < 1e-6);
        assert!(!strong.ok);
        let slow = DriveParams::new(1e-9, 1.0, 10.0).unwrap();
        assert!(!check_secular(&slow, &b, c).ok);
    }

    #[test]
    fn driving_ratios() {
        let d = check_driving(&DriveParams::<f64>::from_ratios(1.0, 10.0).unwrap(), 5e-3);
        assert!((d.ratio - 2.5).abs() < 1e-15 && (d.bound - 4e4).abs() < 1e-8);
        assert!(d.driving_ok && !d.adiabatic_ok);
        let d = check_driving(&DriveParams::<f64>::from_ratios(0.1, 0.1).unwrap(), 5e-3);
        assert!((d.ratio - 2.5e-3).abs() < 1e-15 && d.adiabatic_ok);
        let d = check_driving(&DriveParams::<f64>::from_ratios(40.0, 39.0).unwrap(), 5e-3);
        assert!(d.driving_ok, "ratio {}", d.ratio);
    }

    #[test]
    fn default_report() {
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let r = full_report(&p, &default_bath(5e-3), &QuadratureConfig::default()).unwrap();
        assert!(r.weak_coupling_ok && r.secular.ok && r.driving.driving_ok && !r.driving.adiabatic_ok);
        assert!(r.passes());
        let r = full_report(&p, &default_bath(0.5), &QuadratureConfig::default()).unwrap();
        assert!(!r.weak_coupling_ok && !r.passes());
        let r = full_report(&DriveParams::from_ratios(0.0, 10.0).unwrap(), &default_bath(5e-3), &QuadratureConfig::default()).unwrap();
        assert_eq!(r.driving.ratio, 0.0);
        assert!(r.passes() && r.driving.adiabatic_ok);
    }

    #[test]
    fn scale_covariance() {
        let q = QuadratureConfig::default();
        let k = 3.0;
        let r1 = full_report(&DriveParams::<f64>::new(1.0, 1.0, 10.0).unwrap(), &BathSpec::new(5e-3, 2.0, 4.0).unwrap(), &q).unwrap();
        let r2 = full_report(&DriveParams::<f64>::new(k, k, 10.0 * k).unwrap(), &BathSpec::new(5e-3, 2.0 * k, 4.0 * k).unwrap(), &q).unwrap();
        assert!((r1.secular.margin / r2.secular.margin - 1.0).abs() < 1e-8);
        assert!((r1.driving.ratio / r2.driving.ratio - 1.0).abs() < 1e-14);
        assert!((r2.markov.value / r1.markov.value - k).abs() < 1e-7);
    }

    #[test]
    fn report_is_deterministic() {
        let p = DriveParams::from_ratios(1.0, 10.0).unwrap();
        let q = QuadratureConfig::default();
        let a = full_report(&p, &default_bath(5e-3), &q).unwrap().to_key_values();
        let b = full_report(&p, &default_bath(5e-3), &q).unwrap().to_key_values();
        assert_eq!(a, b);
    }
}
