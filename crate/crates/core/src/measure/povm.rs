//! POVMs, instruments and sharpness.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qcore::{ComplexMatrix, UnitaryMatrix};
use crate::scalar::Real;

fn check_square_family<T: Real>(ops: &[ComplexMatrix<T>], what: &str) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Validation(format!("{what} list is empty")))?;
    let d = first.rows();
    if d == 0 {
        return Err(Error::InvalidDimension(format!("{what} of dimension 0")));
    }
    for (i, op) in ops.iter().enumerate() {
        if op.rows() != d || op.cols() != d {
            return Err(Error::Shape(format!(
                "{what} {i} is {}x{}, expected {d}x{d}",
                op.rows(),
                op.cols()
            )));
        }
    }
    Ok(d)
}

/// A POVM `{M_i}` with `Σ M_i = I` and each `M_i` Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T> {
    dim: usize,
    effects: Vec<ComplexMatrix<T>>,
}

impl<T: Real> Povm<T> {
    /// Checks Hermiticity and completeness. Positivity is left to
    /// [`Povm::validate_psd`].
    pub fn new(effects: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let d = check_square_family(&effects, "effect")?;
        let tol = T::tol(1e-9);
        for (i, m) in effects.iter().enumerate() {
            let h = m.hermiticity_residual()?;
            if !(h <= tol) {
                return Err(Error::Validation(format!(
                    "effect {i} is not Hermitian (residual {h:e})"
                )));
            }
        }
        let mut total = ComplexMatrix::zeros(d, d);
        for m in &effects {
            total.add_assign(m)?;
        }
        let res = total.identity_residual()?;
        if !(res <= tol) {
            return Err(Error::Validation(format!(
                "effects do not sum to the identity (residual {res:e})"
            )));
        }
        Ok(Self { dim: d, effects })
    }

    /// The trivial POVM `{I/d}` repeated `d` times.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension("dimension must be at least 1".into()));
        }
        let p = T::lit(d as f64).recip();
        let e = ComplexMatrix::real_diagonal(&vec![p; d]);
        Ok(Self {
            dim: d,
            effects: vec![e; d],
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn effects(&self) -> &[ComplexMatrix<T>] {
        &self.effects
    }

    #[inline]
    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    /// Eigenvalue check of every effect against `-1e-9`.
    pub fn validate_psd(&self) -> Result<()> {
        for (i, m) in self.effects.iter().enumerate() {
            let min = m.min_eigenvalue_hermitian()?;
            if min < -T::tol(1e-9) {
                return Err(Error::Validation(format!(
                    "effect {i} has negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }

    /// `(1/d) Σ Tr(M_i²)`. For Hermitian effects `Tr(M²)` is the squared
    /// Frobenius norm.
    pub fn sharpness(&self) -> T {
        let total: T = self.effects.iter().map(|m| m.frobenius_sq()).sum();
        total / T::lit(self.dim as f64)
    }
}

/// Sharpness of a POVM.
pub fn sharpness<T: Real>(povm: &Povm<T>) -> T {
    povm.sharpness()
}

/// A quantum instrument given by Kraus operators with `Σ K_i†K_i = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument<T> {
    dim: usize,
    kraus: Vec<ComplexMatrix<T>>,
    normal: bool,
}

impl<T: Real> Instrument<T> {
    pub fn new(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let d = check_square_family(&kraus, "Kraus operator")?;
        let mut total = ComplexMatrix::zeros(d, d);
        for k in &kraus {
            total.add_assign(&k.adjoint().matmul(k)?)?;
        }
        let res = total.identity_residual()?;
        if !(res <= T::tol(1e-9)) {
            return Err(Error::Validation(format!(
                "Kraus operators are not complete (residual {res:e})"
            )));
        }
        let normal = kraus_normality(&kraus)?;
        Ok(Self { dim: d, kraus, normal })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    #[inline]
    pub fn outcome_count(&self) -> usize {
        self.kraus.len()
    }

    /// True iff every `[K_i, K_i†]` vanishes within `1e-9`.
    #[inline]
    pub fn is_normal(&self) -> bool {
        self.normal
    }

    /// Effects `M_i = K_i†K_i`, in Kraus order.
    pub fn povm(&self) -> Povm<T> {
        let effects = self
            .kraus
            .iter()
            .map(|k| k.adjoint().matmul(k).expect("square Kraus operators"))
            .collect();
        Povm { dim: self.dim, effects }
    }
}

fn kraus_normality<T: Real>(kraus: &[ComplexMatrix<T>]) -> Result<bool> {
    for k in kraus {
        if !(k.self_commutator()?.max_abs() <= T::tol(1e-9)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The POVM `{K_i†K_i}` of an instrument.
pub fn povm_of<T: Real>(inst: &Instrument<T>) -> Povm<T> {
    inst.povm()
}

/// Rank-one projectors `Π_i = U|i⟩⟨i|U†` as an instrument.
pub fn projective_instrument<T: Real>(u: &UnitaryMatrix<T>) -> Instrument<T> {
    let d = u.dim();
    let kraus: Vec<_> = (0..d)
        .map(|i| {
            let col = u.column(i);
            ComplexMatrix::outer(&col, &col)
        })
        .collect();
    Instrument {
        dim: d,
        kraus,
        normal: true,
    }
}

/// Builds a real-diagonal Kraus operator, convenient for tests and examples.
pub fn diagonal_kraus<T: Real>(diag: &[T]) -> ComplexMatrix<T> {
    let entries: Vec<_> = diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
    let mut m = ComplexMatrix::zeros(diag.len(), diag.len());
    for (i, z) in entries.into_iter().enumerate() {
        if !z.is_zero() {
            m[(i, i)] = z;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{sample_haar_unitary, RngStream};

    type M = ComplexMatrix<f64>;

    fn diag_example() -> Instrument<f64> {
        Instrument::new(vec![
            diagonal_kraus(&[0.75f64.sqrt(), 0.25f64.sqrt()]),
            diagonal_kraus(&[0.25f64.sqrt(), 0.75f64.sqrt()]),
        ])
        .unwrap()
    }

    #[test]
    fn projective_povm_effects_are_projectors() {
        let mut rng = RngStream::new(11, 0);
        let u = sample_haar_unitary::<f64, _>(2, &mut rng).unwrap();
        let povm = povm_of(&projective_instrument(&u));
        let mut total = M::zeros(2, 2);
        for e in povm.effects() {
            assert!(e.matmul(e).unwrap().max_abs_diff(e).unwrap() < 1e-12);
            assert!((e.trace().unwrap().re - 1.0).abs() < 1e-12);
            total.add_assign(e).unwrap();
        }
        assert!(total.identity_residual().unwrap() < 1e-12);
    }

    #[test]
    fn halved_identity_kraus() {
        let k = M::identity(2).scale_real(0.5f64.sqrt());
        let inst = Instrument::new(vec![k.clone(), k]).unwrap();
        for e in povm_of(&inst).effects() {
            assert!(e.max_abs_diff(&M::identity(2).scale_real(0.5)).unwrap() < 1e-15);
        }
    }

    #[test]
    fn diagonal_kraus_effects() {
        let povm = povm_of(&diag_example());
        assert!(povm.effects()[0].max_abs_diff(&M::real_diagonal(&[0.75, 0.25])).unwrap() < 1e-15);
        assert!(povm.effects()[1].max_abs_diff(&M::real_diagonal(&[0.25, 0.75])).unwrap() < 1e-15);
    }

    #[test]
    fn sharpness_examples() {
        assert!((Povm::<f64>::uniform(4).unwrap().sharpness() - 0.25).abs() < 1e-12);
        let mut rng = RngStream::new(12, 0);
        let u = sample_haar_unitary::<f64, _>(8, &mut rng).unwrap();
        assert!((sharpness(&povm_of(&projective_instrument(&u))) - 1.0).abs() < 1e-12);
        assert!((sharpness(&povm_of(&diag_example())) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn identity_projective_instrument() {
        let inst = projective_instrument(&UnitaryMatrix::<f64>::identity(2).unwrap());
        assert_eq!(inst.kraus()[0], M::real_diagonal(&[1.0, 0.0]));
        assert_eq!(inst.kraus()[1], M::real_diagonal(&[0.0, 1.0]));
        assert!(inst.is_normal());
    }

    #[test]
    fn projective_completeness_d4() {
        let mut rng = RngStream::new(13, 0);
        let u = sample_haar_unitary::<f64, _>(4, &mut rng).unwrap();
        let inst = projective_instrument(&u);
        let mut total = M::zeros(4, 4);
        for k in inst.kraus() {
            total.add_assign(&k.adjoint().matmul(k).unwrap()).unwrap();
        }
        assert!(total.identity_residual().unwrap() <= 1e-10);
    }

    #[test]
    fn normality_flag() {
        assert!(diag_example().is_normal());
        // K0 = |0><1| completed by K1 = |0><0|: K0†K0 + K1†K1 = |1><1| + |0><0|
        let mut k0 = M::zeros(2, 2);
        k0[(0, 1)] = Complex::new(1.0, 0.0);
        let mut k1 = M::zeros(2, 2);
        k1[(0, 0)] = Complex::new(1.0, 0.0);
        let inst = Instrument::new(vec![k0, k1]).unwrap();
        assert!(!inst.is_normal());
    }

    #[test]
    fn incomplete_instrument_rejected() {
        let k = M::identity(2).scale_real(0.5);
        assert!(matches!(Instrument::new(vec![k]), Err(Error::Validation(_))));
        assert!(Instrument::<f64>::new(vec![]).is_err());
        assert!(matches!(
            Instrument::new(vec![M::identity(2), M::identity(3)]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn povm_validation() {
        assert!(Povm::new(vec![M::identity(2)]).is_ok());
        assert!(Povm::new(vec![M::identity(2).scale_real(0.4)]).is_err());
        let neg = Povm::new(vec![M::real_diagonal(&[1.5, 0.5]), M::real_diagonal(&[-0.5, 0.5])]).unwrap();
        assert!(neg.validate_psd().is_err());
        Povm::<f64>::uniform(3).unwrap().validate_psd().unwrap();
    }
}
