//! Special functions.

use crate::scalar::{lit, Real, C};

// B₂ₖ for k = 1..=6
const BERNOULLI: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];

/// Trigamma function `ψ⁽¹⁾(z)` for complex `z` with `Re z > 0`.
///
/// Shifts the argument up with `ψ⁽¹⁾(z) = ψ⁽¹⁾(z+1) + 1/z²` until
/// `Re z > 8`, then sums the asymptotic series
/// `1/z + 1/(2z²) + Σ_{k=1}^{6} B₂ₖ/z^{2k+1}`.
pub fn trigamma<T: Real>(z: C<T>) -> C<T> {
    let mut z = z;
    let mut acc = C::new(T::zero(), T::zero());
    let eight = lit::<T>(8.0);
    while z.re <= eight {
        acc = acc + (z * z).inv();
        z = z + T::one();
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    // Horner in 1/z² for the Bernoulli tail
    let mut tail = C::new(T::zero(), T::zero());
    for &b in BERNOULLI.iter().rev() {
        tail = (tail + lit::<T>(b)) * inv2;
    }
    acc + inv + inv2 * lit::<T>(0.5) + tail * inv
}
