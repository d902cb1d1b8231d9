use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use super::permutation::{all_permutations, Permutation};
use crate::error::{Error, Result};
use crate::qcore::ComplexMatrix;
use crate::scalar::Real;
use crate::Rational;

const MAX_TABLE_T: usize = 5;
const MAX_CYCLE_SUM_T: usize = 8;

/// Gram matrix `G[σ,τ] = d^{c(σ⁻¹τ)}` over `S_T` and its inverse, the
/// Weingarten matrix. Rows and columns follow [`all_permutations`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeingartenTable<T> {
    t: usize,
    d: usize,
    perms: Vec<Permutation>,
    gram: Vec<T>,
    wg: Vec<T>,
}

/// Builds the table for `1 ≤ T ≤ 5` and `d ≥ T`.
///
/// Inverts the rescaled matrix `d^{-T}G`, whose entries lie in `(0, 1]`, and
/// checks `G·Wg = I` within `1e-8`.
pub fn weingarten_table<T: Real>(t: usize, d: usize) -> Result<WeingartenTable<T>> {
    if t == 0 {
        return Err(Error::InvalidParameter("T must be at least 1".into()));
    }
    if t > MAX_TABLE_T {
        return Err(Error::Resource(format!(
            "Weingarten tables are limited to T <= {MAX_TABLE_T} ({}! entries per side), got {t}",
            MAX_TABLE_T
        )));
    }
    if d < t {
        return Err(Error::Domain(format!(
            "the Gram matrix is singular for d < T (d = {d}, T = {t})"
        )));
    }
    let perms = all_permutations(t);
    let n = perms.len();
    let inv: Vec<Permutation> = perms.iter().map(Permutation::inverse).collect();
    let dt = T::lit(d as f64);
    let mut exponents = vec![0i32; n * n];
    for (a, sa) in inv.iter().enumerate() {
        for (b, tb) in perms.iter().enumerate() {
            exponents[a * n + b] = sa.compose(tb)?.cycle_count() as i32;
        }
    }
    let scaled = ComplexMatrix::from_fn(n, n, |a, b| {
        Complex::new(dt.powi(exponents[a * n + b] - t as i32), T::zero())
    });
    let scaled_inv = scaled.inverse()?;
    let d_pow_t = dt.powi(t as i32);
    let gram: Vec<T> = exponents.iter().map(|&e| dt.powi(e)).collect();
    let wg: Vec<T> = scaled_inv.as_slice().iter().map(|z| z.re / d_pow_t).collect();
    let table = WeingartenTable { t, d, perms, gram, wg };
    let residual = table.inverse_residual();
    if !(residual <= T::tol(1e-8)) {
        return Err(Error::Validation(format!(
            "G·Wg deviates from the identity by {residual:e} at T = {t}, d = {d}"
        )));
    }
    Ok(table)
}

impl<T: Real> WeingartenTable<T> {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `T!`.
    pub fn size(&self) -> usize {
        self.perms.len()
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn gram(&self, row: usize, col: usize) -> T {
        self.gram[row * self.size() + col]
    }

    pub fn wg(&self, row: usize, col: usize) -> T {
        self.wg[row * self.size() + col]
    }

    /// Max-entry `|G·Wg − I|`.
    pub fn inverse_residual(&self) -> T {
        let n = self.size();
        let mut worst = T::zero();
        for r in 0..n {
            for c in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc += self.gram(r, k) * self.wg(k, c);
                }
                let target = if r == c { T::one() } else { T::zero() };
                worst = worst.max((acc - target).abs());
            }
        }
        worst
    }

    /// `(entrywise max, max row sum)` of `d^T·Wg − I`.
    pub fn identity_gap(&self) -> (T, T) {
        let n = self.size();
        let d_pow_t = T::lit(self.d as f64).powi(self.t as i32);
        let mut entrywise = T::zero();
        let mut induced = T::zero();
        for r in 0..n {
            let mut row = T::zero();
            for c in 0..n {
                let target = if r == c { T::one() } else { T::zero() };
                let v = (d_pow_t * self.wg(r, c) - target).abs();
                entrywise = entrywise.max(v);
                row += v;
            }
            induced = induced.max(row);
        }
        (entrywise, induced)
    }
}

/// Deviation of `d^T·Wg` from the identity against the bound `T²/d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub t: usize,
    pub d: usize,
    /// Largest entry of `|d^T·Wg − I|`; the bound is checked against this.
    pub entrywise: f64,
    /// Induced ∞-norm (max absolute row sum), reported alongside.
    pub induced: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Requires `T² ≤ d` and `T ≤ 5`.
pub fn wg_identity_gap(t: usize, d: usize) -> Result<GapReport> {
    if t == 0 || t > MAX_TABLE_T || t * t > d {
        return Err(Error::Domain(format!(
            "the gap bound needs 1 <= T <= {MAX_TABLE_T} and T² <= d, got T = {t}, d = {d}"
        )));
    }
    let table = weingarten_table::<f64>(t, d)?;
    let (entrywise, induced) = table.identity_gap();
    let bound = (t * t) as f64 / d as f64;
    Ok(GapReport {
        t,
        d,
        entrywise,
        induced,
        bound,
        holds: entrywise <= bound,
    })
}

fn check_cycle_sum_args(t: usize, d: usize) -> Result<()> {
    if t == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!("need T, d >= 1, got T = {t}, d = {d}")));
    }
    if t > MAX_CYCLE_SUM_T {
        return Err(Error::Resource(format!(
            "cycle-sum enumeration is limited to T <= {MAX_CYCLE_SUM_T}, got {t}"
        )));
    }
    Ok(())
}

/// `(Σ_π d^{c(π)−T}, Π_{k<T} (1 + k/d))`, the left side by enumerating `S_T`.
pub fn cycle_sum_identity(t: usize, d: usize) -> Result<(f64, f64)> {
    check_cycle_sum_args(t, d)?;
    let df = d as f64;
    let lhs = all_permutations(t)
        .iter()
        .map(|p| df.powi(p.cycle_count() as i32 - t as i32))
        .sum();
    let rhs = (0..t).map(|k| 1.0 + k as f64 / df).product();
    Ok((lhs, rhs))
}

/// [`cycle_sum_identity`] in exact rational arithmetic.
pub fn cycle_sum_identity_exact(t: usize, d: usize) -> Result<(Rational, Rational)> {
    check_cycle_sum_args(t, d)?;
    if (t as f64) * (d as f64).log10() > 30.0 {
        return Err(Error::Resource(format!("d^T overflows exact arithmetic at T = {t}, d = {d}")));
    }
    let dr = Rational::from_integer(d as i128);
    let mut lhs = Rational::zero();
    for p in all_permutations(t) {
        lhs += Rational::one() / num_traits::pow(dr, t - p.cycle_count());
    }
    let rhs = (0..t).fold(Rational::one(), |acc, k| acc * (Rational::one() + Rational::from_integer(k as i128) / dr));
    Ok((lhs, rhs))
}
