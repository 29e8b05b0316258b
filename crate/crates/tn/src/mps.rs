//! Locally purified matrix product state of the spin and its star bath.
//!
//! Every site carries a physical leg and an auxiliary copy of it, fused into
//! one index `phys·d + aux`. Gates never touch auxiliary legs, so tracing
//! them out recovers the physical density matrix.

use driven_lindblad::qubit::{Complex2x2, DensityMatrix2, DriveParams};
use ndarray::{concatenate, Array1, Array2, Array3, Axis};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::bath::{thermal_weights, DiscretizedBath, GIBBS_TOLERANCE};
use crate::error::{invalid, Error, Result};

type C = Complex64;

/// SVD truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Largest discarded weight `Σ_{i≥k} s_i² / Σ s_i²` per decomposition.
    pub svd_cutoff: f64,
    pub chi_max: usize,
    /// Abort once the cumulative renormalization exceeds this.
    pub renormalization_limit: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { svd_cutoff: 1e-9, chi_max: 64, renormalization_limit: 1e-3 }
    }
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        if !(self.svd_cutoff >= 0.0 && self.svd_cutoff < 1.0) {
            return Err(invalid("svd_cutoff", "must lie in [0, 1)"));
        }
        if self.chi_max == 0 {
            return Err(invalid("chi_max", "must be at least 1"));
        }
        if !(self.renormalization_limit > 0.0) {
            return Err(invalid("renormalization_limit", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Spin,
    Mode(usize),
}

#[derive(Debug, Clone)]
pub struct PurifiedMps {
    /// Site tensors `(left bond, phys·aux, right bond)` in chain order.
    tensors: Vec<Array3<C>>,
    order: Vec<Site>,
    /// Physical dimension of each mode, indexed by mode.
    mode_dims: Vec<usize>,
    spin_pos: usize,
    truncation: Truncation,
    /// Sum of discarded weights over all decompositions.
    discarded: f64,
    last_discarded: f64,
    time: f64,
}

/// `vec(√ρ)` as the four spin amplitudes `ψ[σ·2 + a]`.
fn spin_purification(rho: &DensityMatrix2<f64>) -> [C; 4] {
    let (vals, vecs) = rho.matrix().hermitian_eigen();
    let mut out = [C::new(0.0, 0.0); 4];
    for (lam, v) in vals.iter().zip(vecs.iter()) {
        let s = lam.max(0.0).sqrt();
        for i in 0..2 {
            for j in 0..2 {
                out[i * 2 + j] += v[i] * v[j].conj() * s;
            }
        }
    }
    out
}

pub fn initial_purified_state(rho_s0: &DensityMatrix2<f64>, bath: &DiscretizedBath, t_b: f64) -> Result<PurifiedMps> {
    initial_purified_state_with(rho_s0, bath, t_b, GIBBS_TOLERANCE, Truncation::default())
}

pub fn initial_purified_state_with(
    rho_s0: &DensityMatrix2<f64>,
    bath: &DiscretizedBath,
    t_b: f64,
    gibbs_tolerance: f64,
    truncation: Truncation,
) -> Result<PurifiedMps> {
    truncation.validate()?;
    if !(t_b >= 0.0) {
        return Err(invalid("T_B", "must be non-negative"));
    }
    let mut tensors = Vec::with_capacity(bath.len() + 1);
    let spin = spin_purification(rho_s0);
    tensors.push(Array3::from_shape_fn((1, 4, 1), |(_, k, _)| spin[k]));
    let mut order = vec![Site::Spin];
    // highest frequency next to the spin, so the widest mode sits at the turnaround
    for (j, m) in bath.modes.iter().enumerate().rev() {
        let (p, lost) = thermal_weights(m.frequency, t_b, m.dim);
        if lost > gibbs_tolerance {
            return Err(Error::GibbsTruncation { mode: j, frequency: m.frequency, dim: m.dim, lost, tolerance: gibbs_tolerance });
        }
        let d = m.dim;
        let mut a = Array3::zeros((1, d * d, 1));
        for (k, pk) in p.iter().enumerate() {
            a[[0, k * d + k, 0]] = C::new(pk.sqrt(), 0.0);
        }
        tensors.push(a);
        order.push(Site::Mode(j));
    }
    Ok(PurifiedMps {
        tensors,
        order,
        mode_dims: bath.dims(),
        spin_pos: 0,
        truncation,
        discarded: 0.0,
        last_discarded: 0.0,
        time: 0.0,
    })
}

impl PurifiedMps {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    fn mode_at(&self, pos: usize) -> usize {
        match self.order[pos] {
            Site::Mode(j) => j,
            Site::Spin => usize::MAX,
        }
    }

    pub fn spin_site(&self) -> usize {
        self.spin_pos
    }

    pub fn order(&self) -> &[Site] {
        &self.order
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.tensors.len() - 1].iter().map(|a| a.shape()[2]).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Cumulative discarded weight, equal to the cumulative renormalization.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded
    }

    /// `⟨ψ|ψ⟩`, read off the orthogonality center on the spin.
    pub fn norm_sqr(&self) -> f64 {
        self.tensors[self.spin_pos].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Spin density matrix, tracing auxiliaries and the bath.
    pub fn spin_matrix(&self) -> Complex2x2<f64> {
        let a = &self.tensors[self.spin_pos];
        let (l, _, r) = a.dim();
        let mut m = [[C::new(0.0, 0.0); 2]; 2];
        for li in 0..l {
            for ri in 0..r {
                for aux in 0..2 {
                    for s in 0..2 {
                        for u in 0..2 {
                            m[s][u] += a[[li, s * 2 + aux, ri]] * a[[li, u * 2 + aux, ri]].conj();
                        }
                    }
                }
            }
        }
        let off = (m[0][1] + m[1][0].conj()) * 0.5;
        Complex2x2::new(C::new(m[0][0].re, 0.0), off, off.conj(), C::new(m[1][1].re, 0.0))
    }

    pub fn spin_state(&self) -> Result<DensityMatrix2<f64>> {
        Ok(DensityMatrix2::new(self.spin_matrix())?)
    }

    fn apply_spin(&mut self, u: &Complex2x2<f64>) {
        let a = &mut self.tensors[self.spin_pos];
        let (l, _, r) = a.dim();
        for li in 0..l {
            for ri in 0..r {
                for aux in 0..2 {
                    let (x0, x1) = (a[[li, aux, ri]], a[[li, 2 + aux, ri]]);
                    a[[li, aux, ri]] = u.m[0][0] * x0 + u.m[0][1] * x1;
                    a[[li, 2 + aux, ri]] = u.m[1][0] * x0 + u.m[1][1] * x1;
                }
            }
        }
    }

    fn apply_phases(&mut self, phases: &[Vec<C>]) {
        for (pos, site) in self.order.iter().enumerate() {
            if let Site::Mode(j) = *site {
                let d = self.mode_dims[j];
                let ph = &phases[j];
                let a = &mut self.tensors[pos];
                for ((_, k, _), z) in a.indexed_iter_mut() {
                    *z *= ph[k / d];
                }
            }
        }
    }

    /// Applies `gate` to the spin and the mode at `pos, pos + 1`, optionally
    /// swapping the two sites, and re-splits by truncated SVD keeping the
    /// orthogonality center on the spin.
    fn two_site(&mut self, pos: usize, gate: &PairGate, swap: bool) -> Result<()> {
        let spin_left = match (self.order[pos], self.order[pos + 1]) {
            (Site::Spin, Site::Mode(_)) => true,
            (Site::Mode(_), Site::Spin) => false,
            _ => unreachable!("two-site gates always pair the spin with a mode"),
        };
        let j = match self.order[pos + usize::from(spin_left)] {
            Site::Mode(j) => j,
            Site::Spin => unreachable!(),
        };
        let d = self.mode_dims[j];
        let (spin, mode) = if spin_left { (pos, pos + 1) } else { (pos + 1, pos) };
        // gate = 1 ⊗ cos + σ_x ⊗ sin, so theta is one product with a doubled bond
        let (ml, _, mr) = self.tensors[mode].dim();
        let mut mc = Array3::<C>::zeros((ml, d * d, mr));
        let mut ms = Array3::<C>::zeros((ml, d * d, mr));
        for x in 0..ml {
            let block = self.tensors[mode].index_axis(Axis(0), x);
            let block = block.into_shape_with_order((d, d * mr)).expect("contiguous");
            mc.index_axis_mut(Axis(0), x).into_shape_with_order((d, d * mr)).expect("contiguous").assign(&gate.cos.dot(&block));
            ms.index_axis_mut(Axis(0), x).into_shape_with_order((d, d * mr)).expect("contiguous").assign(&gate.sin.dot(&block));
        }
        let a = &self.tensors[spin];
        let (sl, _, sr) = a.dim();
        let mut flipped = Array3::<C>::zeros((sl, 4, sr));
        for k in 0..4 {
            flipped.index_axis_mut(Axis(1), k).assign(&a.index_axis(Axis(1), k ^ 2));
        }
        let (l, dl, r, dr) = if spin_left { (sl, 4, mr, d * d) } else { (ml, d * d, sr, 4) };
        let theta = if spin_left {
            let lhs = concatenate(Axis(2), &[a.view(), flipped.view()]).expect("matching shapes");
            let rhs = concatenate(Axis(0), &[mc.view(), ms.view()]).expect("matching shapes");
            let k = 2 * sr;
            let lhs = lhs.as_standard_layout().into_owned().into_shape_with_order((l * dl, k)).expect("standard layout");
            let rhs = rhs.into_shape_with_order((k, dr * r)).expect("standard layout");
            lhs.dot(&rhs)
        } else {
            let lhs = concatenate(Axis(2), &[mc.view(), ms.view()]).expect("matching shapes");
            let rhs = concatenate(Axis(0), &[a.view(), flipped.view()]).expect("matching shapes");
            let k = 2 * mr;
            let lhs = lhs.as_standard_layout().into_owned().into_shape_with_order((l * dl, k)).expect("standard layout");
            let rhs = rhs.into_shape_with_order((k, dr * r)).expect("standard layout");
            lhs.dot(&rhs)
        };
        let new_spin_left = spin_left != swap;
        let mat = if swap {
            let t4 = theta.into_shape_with_order((l, dl, dr, r)).expect("standard layout");
            let t4 = t4.permuted_axes([0, 2, 1, 3]).as_standard_layout().into_owned();
            t4.into_shape_with_order((l * dr, dl * r)).expect("standard layout")
        } else {
            theta
        };
        let (u, vt, k, discarded) = split(mat, &self.truncation, new_spin_left)?;
        let (dl2, dr2) = if new_spin_left { (4, d * d) } else { (d * d, 4) };
        self.tensors[pos] = u.into_shape_with_order((l, dl2, k)).expect("standard layout");
        self.tensors[pos + 1] = vt.into_shape_with_order((k, dr2, r)).expect("standard layout");
        if swap {
            self.order.swap(pos, pos + 1);
        }
        self.spin_pos = if new_spin_left { pos } else { pos + 1 };
        self.discarded += discarded;
        self.last_discarded = discarded;
        if self.discarded > self.truncation.renormalization_limit {
            return Err(Error::Truncation {
                t: self.time,
                renormalization: self.discarded,
                limit: self.truncation.renormalization_limit,
                max_bond: self.max_bond(),
                discarded,
            });
        }
        Ok(())
    }
}


/// Truncated factorization `mat ≈ left · right` from the eigensystem of the
/// smaller Gram matrix. The singular values, renormalized to unit weight, go
/// into `left` when `weight_left` and into `right` otherwise; the other factor
/// is an isometry. Returns the kept rank and the discarded weight fraction.
fn split(mat: Array2<C>, t: &Truncation, weight_left: bool) -> Result<(Array2<C>, Array2<C>, usize, f64)> {
    let (rows, cols) = mat.dim();
    let adj = mat.t().mapv(|z| z.conj());
    let wide = rows <= cols;
    let gram = if wide { mat.dot(&adj) } else { adj.dot(&mat) };
    let (vals, vecs) = gram.eigh(UPLO::Lower).map_err(|e| Error::Linalg(e.to_string()))?;
    let n = vals.len();
    let top = vals[n - 1].max(0.0);
    // eigenvalues below this are rounding noise of the Gram product
    let floor = top * 1e-14;
    let s: Array1<f64> = vals.iter().rev().map(|&l| if l > floor { l.sqrt() } else { 0.0 }).collect();
    let nonzero = s.iter().take_while(|&&x| x > 0.0).count().max(1);
    let (k, discarded) = truncation_rank(&s, t);
    let k = k.min(nonzero);
    let kept: f64 = s.iter().take(k).map(|x| x * x).sum();
    let scale = 1.0 / kept.sqrt();
    let mut v = Array2::<C>::zeros((n, k));
    for i in 0..k {
        // eigh hands back conjugated eigenvectors for row-major complex input
        v.column_mut(i).assign(&vecs.column(n - 1 - i).mapv(|z| z.conj()));
    }
    // the Gram side is the isometry, the other factor carries the singular values
    let (mut left, mut right) = if wide {
        let w = v.t().mapv(|z| z.conj()).dot(&mat);
        (v, w)
    } else {
        let w = mat.dot(&v);
        (w, v.t().mapv(|z| z.conj()))
    };
    for i in 0..k {
        let (fl, fr) = match (wide, weight_left) {
            (true, true) => (s[i] * scale, 1.0 / s[i]),
            (true, false) => (1.0, scale),
            (false, true) => (scale, 1.0),
            (false, false) => (1.0 / s[i], s[i] * scale),
        };
        left.column_mut(i).mapv_inplace(|z| z * fl);
        right.row_mut(i).mapv_inplace(|z| z * fr);
    }
    let standard = |a: Array2<C>| if a.is_standard_layout() { a } else { a.as_standard_layout().into_owned() };
    Ok((standard(left), standard(right), k, discarded))
}

/// Smallest rank whose discarded weight stays within the cutoff, capped at
/// `chi_max`; returns the rank and the discarded weight fraction.
fn truncation_rank(s: &Array1<f64>, t: &Truncation) -> (usize, f64) {
    let total: f64 = s.iter().map(|x| x * x).sum();
    let mut k = s.len();
    let mut tail = 0.0;
    while k > 1 {
        let next = tail + s[k - 1] * s[k - 1];
        if next > t.svd_cutoff * total {
            break;
        }
        tail = next;
        k -= 1;
    }
    while k > t.chi_max {
        tail += s[k - 1] * s[k - 1];
        k -= 1;
    }
    (k, if total > 0.0 { tail / total } else { 0.0 })
}

/// Precomputed gates for one TEBD step of size `dt`.
#[derive(Debug, Clone)]
pub struct StepGates {
    pub dt: f64,
    /// `exp(-i w_j n dt/2)` per mode and level.
    phases: Vec<Vec<C>>,
    /// `exp(-i σ_x ⊗ g_j(b_j + b_j†) dt/2)` per mode.
    half: Vec<PairGate>,
    /// The full-`dt` gate of the lowest mode, which sits at the turnaround.
    full_last: PairGate,
}

/// `exp(-i τ g σ_x ⊗ X) = 1 ⊗ cos(τgX) + σ_x ⊗ (−i sin(τgX))`.
#[derive(Debug, Clone)]
struct PairGate {
    cos: Array2<C>,
    /// Already multiplied by `−i`.
    sin: Array2<C>,
}

/// The two blocks of `exp(-i τ g σ_x ⊗ X)` with `X = b + b†` on `d` levels.
fn pair_gate(g: f64, d: usize, tau: f64) -> Result<PairGate> {
    let x = Array2::from_shape_fn((d, d), |(i, j)| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let (vals, vecs) = x.eigh(UPLO::Upper).map_err(|e| Error::Linalg(e.to_string()))?;
    let mut cos = Array2::<C>::zeros((d, d));
    let mut sin = Array2::<C>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let (mut c, mut s) = (0.0, 0.0);
            for k in 0..d {
                let w = vecs[[i, k]] * vecs[[j, k]];
                let th = tau * g * vals[k];
                c += w * th.cos();
                s += w * th.sin();
            }
            cos[[i, j]] = C::new(c, 0.0);
            sin[[i, j]] = C::new(0.0, -s);
        }
    }
    Ok(PairGate { cos, sin })
}

/// The full gate on `σ ⊗ n`, index `σ·d + n`.
#[cfg(test)]
fn interaction_gate(g: f64, d: usize, tau: f64) -> Result<Array2<C>> {
    let pg = pair_gate(g, d, tau)?;
    let mut gate = Array2::zeros((2 * d, 2 * d));
    for sg in 0..2 {
        for i in 0..d {
            for j in 0..d {
                gate[[sg * d + i, sg * d + j]] = pg.cos[[i, j]];
                gate[[sg * d + i, (1 - sg) * d + j]] = pg.sin[[i, j]];
            }
        }
    }
    Ok(gate)
}

/// `exp(-i τ (ω₀σ_z + h σ_x))`.
fn spin_gate(omega0: f64, h: f64, tau: f64) -> Complex2x2<f64> {
    let e = omega0.hypot(h);
    let (c, s) = ((tau * e).cos(), (tau * e).sin() / e);
    Complex2x2::new(C::new(c, -s * omega0), C::new(0.0, -s * h), C::new(0.0, -s * h), C::new(c, s * omega0))
}

impl StepGates {
    /// Checks `dt ∈ [10⁻³, 10⁻²] t_s`.
    pub fn new(bath: &DiscretizedBath, p: &DriveParams<f64>, dt: f64) -> Result<Self> {
        let ts = p.t_s();
        if !(dt >= 1e-3 * ts * (1.0 - 1e-12) && dt <= 1e-2 * ts * (1.0 + 1e-12)) {
            return Err(invalid("dt", "TEBD step must lie in [1e-3, 1e-2] t_s"));
        }
        Self::unchecked(bath, dt)
    }

    /// Gates for any positive `dt`, skipping the step-size precondition.
    pub fn unchecked(bath: &DiscretizedBath, dt: f64) -> Result<Self> {
        if bath.is_empty() {
            return Err(invalid("N", "at least one mode is required"));
        }
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        let phases = bath
            .modes
            .iter()
            .map(|m| (0..m.dim).map(|n| C::from_polar(1.0, -m.frequency * n as f64 * dt / 2.0)).collect())
            .collect();
        let half = bath.modes.iter().map(|m| pair_gate(m.coupling, m.dim, dt / 2.0)).collect::<Result<_>>()?;
        let first = &bath.modes[0];
        Ok(Self { dt, phases, half, full_last: pair_gate(first.coupling, first.dim, dt)? })
    }
}

/// One second-order step from `t` to `t + dt`.
///
/// Order: system half-step, bath half-step, interaction sweep right then
/// left with the spin routed by swaps, bath half-step, system half-step.
/// The two adjacent gates of the mode at the turnaround are merged into one.
pub fn tebd_step(psi: &mut PurifiedMps, t: f64, p: &DriveParams<f64>, gates: &StepGates) -> Result<()> {
    let dt = gates.dt;
    let n = psi.len() - 1;
    if gates.half.len() != n || psi.spin_pos != 0 || psi.mode_at(n) != 0 {
        return Err(invalid("psi", "state does not match the gates or the spin is not at the chain head"));
    }
    psi.time = t;
    psi.apply_spin(&spin_gate(p.omega0(), p.field(t + 0.25 * dt), 0.5 * dt));
    psi.apply_phases(&gates.phases);
    for pos in 0..n - 1 {
        let j = psi.mode_at(pos + 1);
        psi.two_site(pos, &gates.half[j], true)?;
    }
    psi.two_site(n - 1, &gates.full_last, false)?;
    for pos in (0..n - 1).rev() {
        let j = psi.mode_at(pos);
        psi.two_site(pos, &gates.half[j], true)?;
    }
    psi.apply_phases(&gates.phases);
    psi.apply_spin(&spin_gate(p.omega0(), p.field(t + 0.75 * dt), 0.5 * dt));
    psi.time = t + dt;
    Ok(())
}
