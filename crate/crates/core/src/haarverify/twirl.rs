use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::permutation::Permutation;
use super::weingarten::{weingarten_table, WeingartenTable};
use crate::error::{Error, Result};
use crate::qcore::{sample_haar_unitary, ComplexMatrix, RngStream};
use crate::scalar::Real;

const MAX_TWIRL_T: usize = 3;
const MAX_TWIRL_D: usize = 4;
const MIN_SAMPLES: usize = 1000;
const CHUNK: usize = 1000;

/// `P_π |i_0 … i_{T−1}⟩ = |i_{π⁻¹(0)} … i_{π⁻¹(T−1)}⟩` on `(ℂ^d)^{⊗T}`,
/// first factor most significant.
pub fn permutation_operator<T: Real>(p: &Permutation, d: usize) -> Result<ComplexMatrix<T>> {
    let t = p.size();
    let dim = d
        .checked_pow(t as u32)
        .filter(|&n| n <= 4096)
        .ok_or_else(|| Error::Resource(format!("(C^{d})^⊗{t} is too large to materialize")))?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0; t];
    let mut out = vec![0; t];
    for input in 0..dim {
        let mut rest = input;
        for k in (0..t).rev() {
            digits[k] = rest % d;
            rest /= d;
        }
        for (j, &x) in digits.iter().enumerate() {
            out[p.apply(j)] = x;
        }
        let row = out.iter().fold(0, |acc, &x| acc * d + x);
        m[(row, input)] = Complex::new(T::one(), T::zero());
    }
    Ok(m)
}

/// Closed-form twirl `Σ_{σ,τ} Tr(P_σ† A)·Wg[τ,σ]·P_τ`.
pub fn weingarten_twirl<T: Real>(a: &ComplexMatrix<T>, table: &WeingartenTable<T>) -> Result<ComplexMatrix<T>> {
    let ops = table
        .permutations()
        .iter()
        .map(|p| permutation_operator::<T>(p, table.d()))
        .collect::<Result<Vec<_>>>()?;
    let dim = ops[0].rows();
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            a.rows(),
            a.cols()
        )));
    }
    let overlaps = ops
        .iter()
        .map(|p| p.adjoint().matmul(a)?.trace())
        .collect::<Result<Vec<_>>>()?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (tau, p) in ops.iter().enumerate() {
        let mut coeff = Complex::zero();
        for (sigma, b) in overlaps.iter().enumerate() {
            coeff += b.scale(table.wg(tau, sigma));
        }
        out.add_assign(&p.scale(coeff))?;
    }
    Ok(out)
}

/// Monte Carlo twirl against the Weingarten closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwirlReport {
    pub t: usize,
    pub d: usize,
    pub samples: usize,
    /// Max-entry `|estimate − closed form|`.
    pub deviation: f64,
    /// `1/√samples`, the expected scale of the deviation.
    pub noise_scale: f64,
}

/// Averages `U^{⊗T} A U^{†⊗T}` over `samples` Haar unitaries and compares it
/// with [`weingarten_twirl`]. Samples are split into chunks with their own
/// streams, so the result is independent of thread scheduling.
pub fn twirl_compare<R: Rng + ?Sized>(
    a: &ComplexMatrix<f64>,
    t: usize,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<TwirlReport> {
    if t == 0 || t > MAX_TWIRL_T || d > MAX_TWIRL_D {
        return Err(Error::Resource(format!(
            "twirl comparison is limited to 1 <= T <= {MAX_TWIRL_T}, d <= {MAX_TWIRL_D}, got T = {t}, d = {d}"
        )));
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let dim = d.pow(t as u32);
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            a.rows(),
            a.cols()
        )));
    }
    let table = weingarten_table::<f64>(t, d)?;
    let exact = weingarten_twirl(a, &table)?;

    let base: u64 = rng.gen();
    let chunks = samples.div_ceil(CHUNK);
    let partial = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = RngStream::new(base, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for _ in 0..count {
                let u = sample_haar_unitary::<f64, _>(d, &mut stream)?;
                let mut v = u.matrix().clone();
                for _ in 1..t {
                    v = v.kron(u.matrix());
                }
                acc.add_assign(&v.matmul(a)?.matmul(&v.adjoint())?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for p in &partial {
        sum.add_assign(p)?;
    }
    let estimate = sum.scale_real(1.0 / samples as f64);
    Ok(TwirlReport {
        t,
        d,
        samples,
        deviation: estimate.max_abs_diff(&exact)?,
        noise_scale: 1.0 / (samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haarverify::all_permutations;

    fn qubit_pair_swap() -> ComplexMatrix<f64> {
        permutation_operator(&Permutation::transposition(2, 0, 1).unwrap(), 2).unwrap()
    }

    #[test]
    fn swap_operator_swaps() {
        let s = qubit_pair_swap();
        // |01⟩ = index 1 ↦ |10⟩ = index 2
        assert_eq!(s[(2, 1)].re, 1.0);
        assert_eq!(s[(1, 2)].re, 1.0);
        assert_eq!(s[(0, 0)].re, 1.0);
        assert_eq!(s[(3, 3)].re, 1.0);
    }

    #[test]
    fn permutation_operators_form_a_representation() {
        let perms = all_permutations(3);
        for a in &perms {
            for b in &perms {
                let lhs = permutation_operator::<f64>(&a.compose(b).unwrap(), 2).unwrap();
                let rhs = permutation_operator::<f64>(a, 2)
                    .unwrap()
                    .matmul(&permutation_operator(b, 2).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn identity_is_invariant() {
        let mut rng = RngStream::new(41, 0);
        let id = ComplexMatrix::identity(4);
        let table = weingarten_table::<f64>(2, 2).unwrap();
        assert!(weingarten_twirl(&id, &table).unwrap().max_abs_diff(&id).unwrap() < 1e-12);
        let r = twirl_compare(&id, 2, 2, 2000, &mut rng).unwrap();
        assert!(r.deviation < 1e-12, "{r:?}");
    }

    #[test]
    fn projector_twirl() {
        let mut p = ComplexMatrix::zeros(4, 4);
        p[(0, 0)] = Complex::new(1.0, 0.0);
        let table = weingarten_table::<f64>(2, 2).unwrap();
        let expected = ComplexMatrix::identity(4).add(&qubit_pair_swap()).unwrap().scale_real(1.0 / 6.0);
        assert!(weingarten_twirl(&p, &table).unwrap().max_abs_diff(&expected).unwrap() < 1e-12);
        let mut rng = RngStream::new(42, 0);
        let r = twirl_compare(&p, 2, 2, 10_000, &mut rng).unwrap();
        assert!(r.deviation <= 5.0 * r.noise_scale, "{r:?}");
    }

    #[test]
    fn random_hermitian_converges() {
        let mut rng = RngStream::new(43, 0);
        let g = ComplexMatrix::from_fn(4, 4, |_, _| crate::qcore::complex_gaussian::<f64, _>(&mut rng));
        let h = g.add(&g.adjoint()).unwrap().scale_real(0.5);
        let r = twirl_compare(&h, 2, 2, 100_000, &mut rng).unwrap();
        assert!(r.deviation <= 0.02, "{r:?}");
        let coarse = twirl_compare(&h, 2, 2, 1_000, &mut rng).unwrap();
        let fine = twirl_compare(&h, 2, 2, 10_000, &mut rng).unwrap();
        assert!(fine.deviation / coarse.deviation <= 0.6, "{coarse:?} {fine:?}");
    }

    #[test]
    fn three_copies() {
        let mut rng = RngStream::new(44, 0);
        let mut p = ComplexMatrix::zeros(27, 27);
        p[(0, 0)] = Complex::new(1.0, 0.0);
        let r = twirl_compare(&p, 3, 3, 2000, &mut rng).unwrap();
        assert!(r.deviation <= 5.0 * r.noise_scale, "{r:?}");
    }

    #[test]
    fn parameter_errors() {
        let mut rng = RngStream::new(45, 0);
        let id = ComplexMatrix::identity(4);
        assert!(matches!(twirl_compare(&id, 2, 2, 10, &mut rng), Err(Error::InvalidParameter(_))));
        assert!(matches!(twirl_compare(&id, 2, 5, 1000, &mut rng), Err(Error::Resource(_))));
        assert!(matches!(twirl_compare(&id, 2, 3, 1000, &mut rng), Err(Error::Shape(_))));
    }

    #[test]
    fn chunked_runs_are_reproducible() {
        let a = twirl_compare(&qubit_pair_swap(), 2, 2, 3000, &mut RngStream::new(46, 0)).unwrap();
        let b = twirl_compare(&qubit_pair_swap(), 2, 2, 3000, &mut RngStream::new(46, 0)).unwrap();
        assert_eq!(a, b);
    }
}
