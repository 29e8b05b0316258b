//! Exact Von Neumann propagation of the spin and a tiny truncated bath.

use driven_lindblad::propagators::TimeGrid;
use driven_lindblad::qubit::{Complex2x2, DensityMatrix2, DriveParams};
use ndarray::Array2;
use num_complex::Complex64;

use crate::bath::{thermal_weights, DiscretizedBath};
use crate::error::{invalid, Result};

type C = Complex64;

/// Largest joint Hilbert-space dimension accepted.
pub const MAX_DENSE_DIM: usize = 512;

/// Spin-bath Hamiltonian pieces on the truncated joint space, spin index
/// most significant.
struct DenseModel {
    dim: usize,
    static_part: Array2<C>,
    sx: Array2<C>,
}

fn kron(a: &Array2<C>, b: &Array2<C>) -> Array2<C> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    Array2::from_shape_fn((ra * rb, ca * cb), |(i, j)| a[[i / rb, j / cb]] * b[[i % rb, j % cb]])
}

fn identity(n: usize) -> Array2<C> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) })
}

fn embed_mode(op: &Array2<C>, j: usize, dims: &[usize]) -> Array2<C> {
    let before: usize = dims[..j].iter().product();
    let after: usize = dims[j + 1..].iter().product();
    kron(&kron(&identity(before), op), &identity(after))
}

impl DenseModel {
    fn new(p: &DriveParams<f64>, bath: &DiscretizedBath) -> Result<Self> {
        let dims = bath.dims();
        let nb: usize = dims.iter().product();
        let dim = 2 * nb;
        if dim > MAX_DENSE_DIM {
            return Err(invalid("d_j", format!("joint dimension {dim} exceeds {MAX_DENSE_DIM}")));
        }
        let sz = Array2::from_shape_vec((2, 2), vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-1.0, 0.0)])
            .expect("2x2");
        let sx = Array2::from_shape_vec((2, 2), vec![C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)])
            .expect("2x2");
        let mut hb = Array2::<C>::zeros((nb, nb));
        let mut coupling = Array2::<C>::zeros((nb, nb));
        for (j, m) in bath.modes.iter().enumerate() {
            let d = m.dim;
            let num = Array2::from_shape_fn((d, d), |(i, k)| if i == k { C::new(i as f64, 0.0) } else { C::new(0.0, 0.0) });
            let x = Array2::from_shape_fn((d, d), |(i, k)| {
                if i + 1 == k || k + 1 == i { C::new(i.max(k) as f64, 0.0).sqrt() } else { C::new(0.0, 0.0) }
            });
            hb = hb + embed_mode(&num, j, &dims).mapv(|z| z * m.frequency);
            coupling = coupling + embed_mode(&x, j, &dims).mapv(|z| z * m.coupling);
        }
        let static_part = kron(&sz, &identity(nb)).mapv(|z| z * p.omega0()) + kron(&identity(2), &hb) + kron(&sx, &coupling);
        Ok(Self { dim, static_part, sx: kron(&sx, &identity(nb)) })
    }

    fn hamiltonian(&self, t: f64, p: &DriveParams<f64>) -> Array2<C> {
        let h = p.field(t);
        &self.static_part + &self.sx.mapv(|z| z * h)
    }
}

fn commutator_rhs(h: &Array2<C>, rho: &Array2<C>) -> Array2<C> {
    let c = h.dot(rho) - rho.dot(h);
    c.mapv(|z| C::new(z.im, -z.re))
}

fn reduce_to_spin(rho: &Array2<C>) -> Complex2x2<f64> {
    let nb = rho.nrows() / 2;
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for (s, row) in m.iter_mut().enumerate() {
        for (u, v) in row.iter_mut().enumerate() {
            *v = (0..nb).map(|k| rho[[s * nb + k, u * nb + k]]).sum();
        }
    }
    let off = (m[0][1] + m[1][0].conj()) * 0.5;
    Complex2x2::new(C::new(m[0][0].re, 0.0), off, off.conj(), C::new(m[1][1].re, 0.0))
}

/// RK4 integration of `dρ/dt = -i[H(t), ρ]` from `ρ_S ⊗ ρ_th` with the same
/// truncated Gibbs weights the purified state uses. Returns the reduced spin
/// state every `stride` steps.
pub fn dense_reference(
    rho_s0: &DensityMatrix2<f64>,
    p: &DriveParams<f64>,
    bath: &DiscretizedBath,
    t_b: f64,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<Vec<(f64, DensityMatrix2<f64>)>> {
    let grid = TimeGrid::new(t_end, dt, stride)?;
    let model = DenseModel::new(p, bath)?;
    let mut rho_b = Array2::from_elem((1, 1), C::new(1.0, 0.0));
    for m in &bath.modes {
        let (w, _) = thermal_weights(m.frequency, t_b, m.dim);
        let th = Array2::from_shape_fn((m.dim, m.dim), |(i, k)| if i == k { C::new(w[i], 0.0) } else { C::new(0.0, 0.0) });
        rho_b = kron(&rho_b, &th);
    }
    let s = rho_s0.matrix();
    let rs = Array2::from_shape_fn((2, 2), |(i, k)| s.m[i][k]);
    let mut rho = kron(&rs, &rho_b);
    debug_assert_eq!(rho.nrows(), model.dim);
    let mut out = vec![(0.0, DensityMatrix2::new(reduce_to_spin(&rho))?)];
    for k in 0..grid.steps {
        let t = grid.time(k);
        let h0 = model.hamiltonian(t, p);
        let hm = model.hamiltonian(t + 0.5 * dt, p);
        let h1 = model.hamiltonian(t + dt, p);
        let k1 = commutator_rhs(&h0, &rho);
        let k2 = commutator_rhs(&hm, &(&rho + &k1.mapv(|z| z * (0.5 * dt))));
        let k3 = commutator_rhs(&hm, &(&rho + &k2.mapv(|z| z * (0.5 * dt))));
        let k4 = commutator_rhs(&h1, &(&rho + &k3.mapv(|z| z * dt)));
        rho = rho + (k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (dt / 6.0));
        if grid.is_stored(k + 1) {
            out.push((grid.time(k + 1), DensityMatrix2::new(reduce_to_spin(&rho))?));
        }
    }
    Ok(out)
}
