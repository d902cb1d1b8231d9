//! Haar-distributed unitaries and states.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use super::matrix::ComplexMatrix;
use super::states::{require_dim, PureState, UnitaryMatrix};
use crate::error::Result;
use crate::scalar::Real;

/// Standard complex Gaussian, `E|z|² = 1`.
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    Complex::new(T::standard_normal(rng) * s, T::standard_normal(rng) * s)
}

/// Samples a Haar-random `d × d` unitary.
///
/// A Ginibre matrix is factored as `QR` with Householder reflections, then
/// each column of `Q` is multiplied by the phase of the matching diagonal
/// entry of `R`, so that the triangular factor has a positive real diagonal.
/// Without that correction `Q` is not Haar distributed.
pub fn sample_haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitaryMatrix<T>> {
    require_dim(d)?;
    let mut a = ComplexMatrix::from_fn(d, d, |_, _| complex_gaussian::<T, _>(rng));
    let (q, r_diag) = householder_qr(&mut a);
    let q = ComplexMatrix::from_fn(d, d, |r, c| {
        let rc = r_diag[c];
        let n = rc.norm();
        let phase = if n > T::zero() { rc / n } else { Complex::new(T::one(), T::zero()) };
        q[(r, c)] * phase
    });
    Ok(UnitaryMatrix::new_unchecked(q))
}

/// Householder QR of `a` (overwritten with `R`). Returns the explicit `Q`
/// and the diagonal of `R`.
fn householder_qr<T: Real>(a: &mut ComplexMatrix<T>) -> (ComplexMatrix<T>, Vec<Complex<T>>) {
    let n = a.rows();
    let mut q = ComplexMatrix::identity(n);
    let mut diag = Vec::with_capacity(n);
    let two = T::lit(2.0);
    let mut v = vec![Complex::<T>::zero(); n];

    for k in 0..n {
        let norm_x = (k..n).map(|r| a[(r, k)].norm_sqr()).sum::<T>().sqrt();
        if norm_x == T::zero() {
            diag.push(Complex::zero());
            continue;
        }
        let x0 = a[(k, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::new(T::one(), T::zero()) };
        let alpha = -phase * norm_x;

        for r in k..n {
            v[r] = a[(r, k)];
        }
        v[k] -= alpha;
        let v_norm_sq: T = (k..n).map(|r| v[r].norm_sqr()).sum();
        if v_norm_sq == T::zero() {
            diag.push(a[(k, k)]);
            continue;
        }
        let beta = two / v_norm_sq;

        // A <- (I - beta v v†) A on rows k.., columns k..
        for c in k..n {
            let w: Complex<T> = (k..n).map(|r| v[r].conj() * a[(r, c)]).sum();
            let w = w * beta;
            for r in k..n {
                let vr = v[r];
                a[(r, c)] -= vr * w;
            }
        }
        // Q <- Q (I - beta v v†)
        for r in 0..n {
            let w: Complex<T> = (k..n).map(|c| q[(r, c)] * v[c]).sum();
            let w = w * beta;
            for c in k..n {
                let vc = v[c].conj();
                q[(r, c)] -= w * vc;
            }
        }
        diag.push(a[(k, k)]);
    }
    (q, diag)
}

/// Samples a Haar-random pure state (equal in law to any fixed column of a
/// Haar unitary). Its squared amplitudes are flat-Dirichlet on the simplex.
pub fn sample_haar_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState<T>> {
    require_dim(d)?;
    let amps: Vec<Complex<T>> = (0..d).map(|_| complex_gaussian(rng)).collect();
    PureState::normalized(amps)
}
