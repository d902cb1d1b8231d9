use rand::Rng;

use super::Decision;
use crate::error::{Error, Result};
use crate::measure::{Access, BlackBox, Probe};
use crate::scalar::Real;

/// `N choose 2` as a float.
pub fn pair_count(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Midpoint between the expected collision counts of the two hypotheses,
/// `C(N,2)·(1/d + 2/(d+1))/2`.
pub fn collision_threshold(n: usize, d: usize) -> f64 {
    let d = d as f64;
    pair_count(n) * (1.0 / d + 2.0 / (d + 1.0)) / 2.0
}

/// `⌈20√d⌉`.
pub fn default_collision_queries(d: usize) -> usize {
    (20.0 * (d as f64).sqrt()).ceil() as usize
}

/// Number of pairs `a < b` with equal labels, `Σ_x C(m_x, 2)`.
pub fn collision_count(samples: &mut [usize]) -> u64 {
    samples.sort_unstable();
    let mut total = 0u64;
    let mut run = 0u64;
    for w in 0..samples.len() {
        if w > 0 && samples[w] == samples[w - 1] {
            run += 1;
        } else {
            total += run * (run + 1) / 2;
            run = 0;
        }
    }
    total + run * (run + 1) / 2
}

/// Result of one collision test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionOutcome {
    pub decision: Decision,
    pub collisions: u64,
    pub queries: usize,
}

/// Queries the device `n` times on `|0⟩` and thresholds the collision count.
pub fn collision_test<T: Real, B: BlackBox<T>, R: Rng + ?Sized>(device: &B, n: usize, rng: &mut R) -> Result<Decision> {
    collision_test_counted(device, n, rng).map(|o| o.decision)
}

/// [`collision_test`], also returning the raw count.
pub fn collision_test_counted<T: Real, B: BlackBox<T>, R: Rng + ?Sized>(
    device: &B,
    n: usize,
    rng: &mut R,
) -> Result<CollisionOutcome> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("collision test needs N >= 2, got {n}")));
    }
    let d = device.dim();
    if d < 2 {
        return Err(Error::DegenerateDimension(d));
    }
    if device.access() != Access::ClassicalOnly {
        return Err(Error::Access("the collision test runs on classical-only devices".into()));
    }
    let probe = Probe::Basis(0);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        samples.push(device.probe(&probe, rng)?.index);
    }
    let collisions = collision_count(&mut samples);
    Ok(CollisionOutcome {
        decision: Decision::from_threshold(collisions as f64, collision_threshold(n, d)),
        collisions,
        queries: n,
    })
}
