//! Finite star bath sampled from the Ohmic spectral density.

use driven_lindblad::bath::{bose_occupation, Mode};
use driven_lindblad::BathSpec;
use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Default Gibbs weight a truncated oscillator may lose. The occupancy rule
/// with `c_occ = 4` loses at most `e^{-4}` per mode at any temperature.
pub const GIBBS_TOLERANCE: f64 = 2e-2;
/// Default multiplier `c_occ` in the local-dimension rule.
pub const OCCUPANCY_CUTOFF: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    /// `w_j = j·dw`.
    pub frequency: f64,
    /// `g_j = sqrt(a w_j e^{-w_j/w_c} dw)`.
    pub coupling: f64,
    /// Local Hilbert-space dimension `d_j`.
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    pub spec: BathSpec,
    pub w_max: f64,
    pub dw: f64,
    pub modes: Vec<BathMode>,
    /// Error of cutting the spectral integral at `w_max`.
    pub eps1: f64,
    /// Bound on the right-Riemann-sum error, `a w_max²/(2N)`.
    pub eps2: f64,
    /// `w_max < w_c`: the `eps1` bound is no longer small.
    pub cutoff_degraded: bool,
}

/// `max(2, ceil(c_occ n̄) + 2)`.
pub fn local_dimension(frequency: f64, temperature: f64, occupancy_cutoff: f64) -> usize {
    let n = bose_occupation(frequency, temperature);
    let d = (occupancy_cutoff * n).ceil() + 2.0;
    if d.is_finite() && d < 1e6 { (d as usize).max(2) } else { 1_000_000 }
}

pub fn truncation_error(b: &BathSpec, w_max: f64) -> f64 {
    let wc = b.cutoff();
    b.coupling() * wc * wc * (w_max / wc + 1.0) * (-w_max / wc).exp()
}

pub fn discretization_bound(b: &BathSpec, w_max: f64, n: usize) -> f64 {
    b.coupling() * w_max * w_max / (2.0 * n as f64)
}

pub fn discretize_bath(b: &BathSpec, n: usize, w_max: f64, occupancy_cutoff: f64) -> Result<DiscretizedBath> {
    if n == 0 {
        return Err(invalid("N", "at least one mode is required"));
    }
    if !(w_max > 0.0) || !w_max.is_finite() {
        return Err(invalid("w_max", "must be positive and finite"));
    }
    if !(occupancy_cutoff >= 0.0) || !occupancy_cutoff.is_finite() {
        return Err(invalid("occupancy_cutoff", "must be non-negative"));
    }
    let (a, wc, tb) = (b.coupling(), b.cutoff(), b.temperature());
    let dw = w_max / n as f64;
    let modes = (1..=n)
        .map(|j| {
            let w = j as f64 * dw;
            BathMode {
                frequency: w,
                coupling: (a * w * (-w / wc).exp() * dw).sqrt(),
                dim: local_dimension(w, tb, occupancy_cutoff),
            }
        })
        .collect();
    Ok(DiscretizedBath {
        spec: *b,
        w_max,
        dw,
        modes,
        eps1: truncation_error(b, w_max),
        eps2: discretization_bound(b, w_max, n),
        cutoff_degraded: w_max < wc,
    })
}

impl DiscretizedBath {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Overrides every local dimension.
    pub fn with_uniform_dim(mut self, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("d_j", "local dimension must be at least 2"));
        }
        self.modes.iter_mut().for_each(|m| m.dim = dim);
        Ok(self)
    }

    /// Scales every coupling by `s`.
    pub fn with_coupling_scale(mut self, s: f64) -> Self {
        self.modes.iter_mut().for_each(|m| m.coupling *= s);
        self
    }

    pub fn dims(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.dim).collect()
    }

    pub fn core_modes(&self) -> Vec<Mode<f64>> {
        self.modes.iter().map(|m| Mode { frequency: m.frequency, coupling: m.coupling }).collect()
    }

    /// `Σ_j g_j²`.
    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.coupling * m.coupling).sum()
    }

    /// Actual right-sum error `|∫₀^{w_max} J − Σ g_j²|`.
    pub fn discretization_error(&self) -> f64 {
        let (a, wc) = (self.spec.coupling(), self.spec.cutoff());
        // ∫₀^W a w e^{-w/wc} dw = a wc² [1 − (1 + W/wc) e^{-W/wc}]
        let exact = a * wc * wc * (1.0 - (1.0 + self.w_max / wc) * (-self.w_max / wc).exp());
        (exact - self.total_weight()).abs()
    }

    /// `R(t) = Σ g_j² [coth(w_j/2T) cos w_j t − i sin w_j t]`.
    pub fn correlation(&self, t: f64, temperature: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|m| {
                let g2 = m.coupling * m.coupling;
                let coth = 1.0 / (m.frequency / (2.0 * temperature)).tanh();
                let wt = m.frequency * t;
                Complex64::new(g2 * coth * wt.cos(), -g2 * wt.sin())
            })
            .sum()
    }

    /// Recurrence guard: first `t` at which `|R(t)|` climbs back above half
    /// of `|R(0)|` after having fallen below a tenth of it.
    ///
    /// Returns 0 when the correlation never decays and infinity when no
    /// revival occurs within two revival periods.
    pub fn recurrence_time(&self, temperature: f64) -> f64 {
        let r0 = self.correlation(0.0, temperature).norm();
        if r0 == 0.0 {
            return f64::INFINITY;
        }
        let h = std::f64::consts::PI / (20.0 * self.w_max);
        let horizon = 2.0 * std::f64::consts::TAU / self.dw;
        let mut decayed = false;
        let mut k = 1usize;
        loop {
            let t = k as f64 * h;
            if t > horizon {
                return if decayed { f64::INFINITY } else { 0.0 };
            }
            let r = self.correlation(t, temperature).norm() / r0;
            if !decayed && r < 0.1 {
                decayed = true;
            } else if decayed && r > 0.5 {
                return t;
            }
            k += 1;
        }
    }
}

/// Gibbs weights of `w b†b` at temperature `T` on `d` levels, renormalized,
/// together with the weight the truncation removed.
pub fn thermal_weights(frequency: f64, temperature: f64, dim: usize) -> (Vec<f64>, f64) {
    let x = if temperature > 0.0 { (-frequency / temperature).exp() } else { 0.0 };
    let mut p: Vec<f64> = (0..dim).map(|k| x.powi(k as i32)).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    (p, x.powi(dim as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn couplings_follow_density() {
        let b = BathSpec::new(1e-3, 3.0, 1.0).unwrap();
        let bath = discretize_bath(&b, 10, 1.0, OCCUPANCY_CUTOFF).unwrap();
        assert!((bath.dw - 0.1).abs() < 1e-15);
        let g1 = bath.modes[0].coupling;
        assert!((g1 - 3.11e-3).abs() < 5e-6, "{g1}");
        for m in &bath.modes {
            let want = 1e-3 * m.frequency * (-m.frequency / 3.0).exp() * bath.dw;
            assert!((m.coupling * m.coupling - want).abs() < 1e-18);
        }
    }

    #[test]
    fn eps1_example() {
        let b = BathSpec::new(1e-3, 3.0, 1.0).unwrap();
        let bath = discretize_bath(&b, 30, 10.0, OCCUPANCY_CUTOFF).unwrap();
        assert!((bath.eps1 - 1.39e-3).abs() < 1e-5, "{}", bath.eps1);
        assert!(bath.discretization_error() <= bath.eps2);
        assert!(!bath.cutoff_degraded);
        assert!(discretize_bath(&b, 30, 2.0, OCCUPANCY_CUTOFF).unwrap().cutoff_degraded);
    }

    #[test]
    fn dims_non_increasing() {
        let b = BathSpec::new(5e-3, 2.0, 4.0).unwrap();
        let bath = discretize_bath(&b, 30, 10.0, OCCUPANCY_CUTOFF).unwrap();
        let d = bath.dims();
        assert!(d.windows(2).all(|w| w[0] >= w[1]), "{d:?}");
        assert!(d.iter().all(|&x| x >= 2));
        let cold = discretize_bath(&b.with_coupling(5e-3).unwrap(), 30, 10.0, 0.0).unwrap();
        assert!(cold.dims().iter().all(|&x| x == 2));
    }

    #[test]
    fn gibbs_limits() {
        let (p, lost) = thermal_weights(1.0, 1e-3, 4);
        assert!((p[0] - 1.0).abs() < 1e-15 && lost < 1e-300);
        let (p, lost) = thermal_weights(1.0, 1.0, 6);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((lost - (-6.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn occupancy_rule_bounds_gibbs_loss() {
        let mut worst: f64 = 0.0;
        for k in 1..4000 {
            let w = k as f64 * 5e-3;
            let d = local_dimension(w, 1.0, OCCUPANCY_CUTOFF);
            worst = worst.max(thermal_weights(w, 1.0, d).1);
        }
        assert!(worst <= (-4.0f64).exp() && worst < GIBBS_TOLERANCE, "{worst}");
        assert!(worst > 1e-6);
    }

    #[test]
    fn recurrence_near_revival_period() {
        let b = BathSpec::new(5e-3, 2.0, 4.0).unwrap();
        let bath = discretize_bath(&b, 30, 10.0, OCCUPANCY_CUTOFF).unwrap();
        let t = bath.recurrence_time(4.0);
        let period = std::f64::consts::TAU / bath.dw;
        assert!(t > 0.5 * period && t <= period * 1.0001, "{t} vs {period}");
    }
}
