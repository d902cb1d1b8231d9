use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::pair_count;

/// Power sums `s₂ = Σ p(x)²` and `s₃ = Σ p(x)³` of an outcome law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub s2: f64,
    pub s3: f64,
}

impl MomentPair {
    pub fn new(s2: f64, s3: f64) -> Result<Self> {
        if !(0.0 < s3 && s3 <= s2 && s2 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "power sums must satisfy 0 < s3 <= s2 <= 1, got s2={s2}, s3={s3}"
            )));
        }
        Ok(Self { s2, s3 })
    }

    /// Power sums of an explicit distribution.
    pub fn of_distribution(p: &[f64]) -> Result<Self> {
        let s2 = p.iter().map(|x| x * x).sum();
        let s3 = p.iter().map(|x| x * x * x).sum();
        Self::new(s2, s3)
    }
}

/// `(1/d, 1/d²)`.
pub fn uniform_moments(d: usize) -> MomentPair {
    let d = d.max(1) as f64;
    MomentPair {
        s2: 1.0 / d,
        s3: 1.0 / (d * d),
    }
}

/// Haar averages of the power sums of `|⟨x|U|0⟩|²`:
/// `(2/(d+1), 6/((d+1)(d+2)))`.
pub fn haar_mean_moments(d: usize) -> MomentPair {
    let d = d.max(1) as f64;
    MomentPair {
        s2: 2.0 / (d + 1.0),
        s3: 6.0 / ((d + 1.0) * (d + 2.0)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionMoments {
    pub expectation: f64,
    pub variance: f64,
}

fn triple_count(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) * (n - 2.0) / 6.0
}

/// `E[C] = C(N,2)s₂` and `Var[C] = C(N,2)(s₂−s₂²) + 6C(N,3)(s₃−s₂²)`.
pub fn collision_moments(n: usize, m: MomentPair) -> Result<CollisionMoments> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need N >= 2, got {n}")));
    }
    let pairs = pair_count(n);
    let s2sq = m.s2 * m.s2;
    let variance = pairs * (m.s2 - s2sq) + 6.0 * triple_count(n) * (m.s3 - s2sq);
    Ok(CollisionMoments {
        expectation: pairs * m.s2,
        variance: variance.max(0.0),
    })
}

/// Upper bound on the collision-count variance under the Haar hypothesis,
/// `C(N,2)·2/d + C(N,3)·36/d²`.
pub fn haar_variance_upper(n: usize, d: usize) -> f64 {
    let d = d as f64;
    pair_count(n) * 2.0 / d + triple_count(n) * 36.0 / (d * d)
}

/// Chebyshev lower bound on the per-hypothesis success of the midpoint
/// collision test: `1 − max(Var₀, Var₁ upper)/(gap/2)²`, clipped to `[0, 1]`.
pub fn chebyshev_success(n: usize, d: usize) -> f64 {
    if n < 2 || d < 2 {
        return 0.0;
    }
    let (Ok(h0), Ok(h1)) = (
        collision_moments(n, uniform_moments(d)),
        collision_moments(n, haar_mean_moments(d)),
    ) else {
        return 0.0;
    };
    let gap = h1.expectation - h0.expectation;
    if gap <= 0.0 {
        return 0.0;
    }
    let var = h0.variance.max(haar_variance_upper(n, d));
    let half = gap / 2.0;
    (1.0 - var / (half * half)).clamp(0.0, 1.0)
}
