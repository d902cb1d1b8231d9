//! Validated carriers for unitaries and quantum states.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn require_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidDimension("dimension must be at least 1".into()));
    }
    Ok(())
}

/// A `d × d` unitary, checked to `max |U†U − I| ≤ 1e-10 · d`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> UnitaryMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::Shape(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let d = matrix.rows();
        let residual = matrix.adjoint().matmul(&matrix)?.identity_residual()?;
        let tol = T::tol(1e-10) * T::lit(d as f64);
        if !(residual <= tol) {
            return Err(Error::Validation(format!(
                "unitarity residual {residual:e} exceeds {tol:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn identity(d: usize) -> Result<Self> {
        require_dim(d)?;
        Ok(Self {
            matrix: ComplexMatrix::identity(d),
        })
    }

    /// Wraps a matrix already known to be unitary to working precision.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix<T>) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn unitarity_residual(&self) -> T {
        self.matrix
            .adjoint()
            .matmul(&self.matrix)
            .and_then(|m| m.identity_residual())
            .unwrap_or(T::infinity())
    }

    /// The column `U|i⟩`.
    pub fn column(&self, i: usize) -> Vec<Complex<T>> {
        self.matrix.column(i)
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        require_dim(amplitudes.len())?;
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !((norm - T::one()).abs() <= T::tol(1e-10)) {
            return Err(Error::Validation(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        require_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        let inv = norm.recip();
        for z in &mut amplitudes {
            *z = *z * inv;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(d: usize, index: usize) -> Result<Self> {
        require_dim(d)?;
        if index >= d {
            return Err(Error::Shape(format!("basis index {index} out of range for d = {d}")));
        }
        let mut amplitudes = vec![Complex::zero(); d];
        amplitudes[index] = Complex::one();
        Ok(Self { amplitudes })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Outcome weights `|⟨x|ψ⟩|²`.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityState<T> {
        DensityState {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// A density matrix: Hermitian with unit trace. Positivity is checked only
/// on request via [`DensityState::validate_psd`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityState<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::Shape(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let tol = T::tol(1e-10);
        let herm = matrix.hermiticity_residual()?;
        if !(herm <= tol) {
            return Err(Error::Validation(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = matrix.trace()?;
        if !((tr.re - T::one()).abs() <= tol && tr.im.abs() <= tol) {
            return Err(Error::Validation(format!("trace {tr} differs from 1")));
        }
        Ok(Self { matrix })
    }

    /// Normalizes a nonzero Hermitian PSD operator by its trace.
    pub fn from_unnormalized(matrix: ComplexMatrix<T>) -> Result<Self> {
        let tr = matrix.trace()?.re;
        if !(tr > T::zero()) {
            return Err(Error::Validation(format!("trace {tr} is not positive")));
        }
        Self::new(matrix.scale_real(tr.recip()))
    }

    pub fn basis(d: usize, index: usize) -> Result<Self> {
        Ok(PureState::basis(d, index)?.to_density())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `Tr(ρ²)`, which for Hermitian `ρ` is the squared Frobenius norm.
    pub fn purity(&self) -> T {
        self.matrix.frobenius_sq()
    }

    /// `Tr(ρ A)` for a square operator `A` of matching size.
    pub fn expectation(&self, op: &ComplexMatrix<T>) -> Result<Complex<T>> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "operator {}x{} on a state of dimension {}",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        let d = self.dim();
        let mut acc = Complex::zero();
        for r in 0..d {
            for c in 0..d {
                acc += self.matrix[(r, c)] * op[(c, r)];
            }
        }
        Ok(acc)
    }

    /// Checks the smallest eigenvalue against `-1e-9`.
    pub fn validate_psd(&self) -> Result<()> {
        let min = self.matrix.min_eigenvalue_hermitian()?;
        if min < -T::tol(1e-9) {
            return Err(Error::Validation(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(())
    }
}

/// The maximally mixed state `I/d`.
pub fn maximally_mixed<T: Real>(d: usize) -> Result<DensityState<T>> {
    require_dim(d)?;
    let p = T::lit(d as f64).recip();
    Ok(DensityState {
        matrix: ComplexMatrix::real_diagonal(&vec![p; d]),
    })
}
