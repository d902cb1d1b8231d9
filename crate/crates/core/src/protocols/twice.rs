use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Decision;
use crate::error::{Error, Result};
use crate::measure::{Access, BlackBox, Device, Probe};
use crate::scalar::Real;

/// Quantum iff the estimated sharpness reaches this value. Since `1/d ≤ 1/2`
/// for `d ≥ 2`, it sits inside the gap between the two hypotheses.
pub const SHARPNESS_THRESHOLD: f64 = 0.5;

/// Fraction of repeated-outcome rounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharpnessEstimate {
    pub mean: f64,
    pub reps: usize,
    pub stderr: f64,
}

impl SharpnessEstimate {
    pub fn from_counts(collisions: usize, reps: usize) -> Self {
        let mean = collisions as f64 / reps as f64;
        Self {
            mean,
            reps,
            stderr: (mean * (1.0 - mean) / reps as f64).sqrt(),
        }
    }
}

fn require_post_state<T: Real, B: BlackBox<T>>(device: &B) -> Result<()> {
    if device.access() != Access::WithPostState {
        return Err(Error::Access("measuring twice needs post-measurement states".into()));
    }
    Ok(())
}

fn post_of<T>(post: Option<Probe<T>>) -> Result<Probe<T>> {
    post.ok_or_else(|| Error::Access("device withheld the post-measurement state".into()))
}

/// Measures `I/d`, re-measures the post-measurement state, and records how
/// often the two outcomes agree. Unbiased for the sharpness when the Kraus
/// operators are normal.
pub fn measure_twice<T: Real, B: BlackBox<T>, R: Rng + ?Sized>(
    device: &B,
    reps: usize,
    rng: &mut R,
) -> Result<SharpnessEstimate> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be at least 1".into()));
    }
    require_post_state(device)?;
    let mut hits = 0;
    for _ in 0..reps {
        let first = device.probe(&Probe::MaximallyMixed, rng)?;
        let second = device.probe(&post_of(first.post)?, rng)?;
        if first.index == second.index {
            hits += 1;
        }
    }
    Ok(SharpnessEstimate::from_counts(hits, reps))
}

/// Estimate plus its deviation from the device's true sharpness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub estimate: SharpnessEstimate,
    pub true_sharpness: f64,
    pub bias: f64,
    /// Whether the Kraus operators are normal, i.e. whether the estimator
    /// is unbiased for this device.
    pub normal: bool,
}

/// Runs [`measure_twice`] on a device whose POVM is known and reports
/// `|mean − S|`. Non-normal instruments are measured anyway.
pub fn measure_twice_with_bias<T: Real, R: Rng + ?Sized>(
    device: &Device<T>,
    reps: usize,
    rng: &mut R,
) -> Result<BiasReport> {
    let estimate = measure_twice(device, reps, rng)?;
    let true_sharpness = device.true_sharpness().as_f64();
    let normal = match device.kind() {
        crate::measure::DeviceKind::Custom(inst) => inst.is_normal(),
        _ => true,
    };
    Ok(BiasReport {
        estimate,
        true_sharpness,
        bias: (estimate.mean - true_sharpness).abs(),
        normal,
    })
}

/// Quantum iff `mean ≥ 1/2`.
pub fn decide_sharpness(est: &SharpnessEstimate, d: usize) -> Decision {
    debug_assert!(d >= 2, "sharpness decision needs d >= 2");
    Decision::from_threshold(est.mean, SHARPNESS_THRESHOLD)
}

/// One round of the coin-routed protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RobustRound {
    /// `false`: second query on the post-state; `true`: on a fresh `I/d`.
    pub coin: bool,
    pub first: usize,
    pub second: usize,
}

/// First query on `I/d`, then a fair coin (drawn after the first outcome)
/// routes either the post-state or a fresh `I/d` into the second query.
pub fn robust_round<T: Real, B: BlackBox<T>, R: Rng + ?Sized>(device: &B, rng: &mut R) -> Result<RobustRound> {
    let first = device.probe(&Probe::MaximallyMixed, rng)?;
    let coin: bool = rng.gen();
    let input = if coin {
        Probe::MaximallyMixed
    } else {
        post_of(first.post)?
    };
    let second = device.probe(&input, rng)?;
    Ok(RobustRound {
        coin,
        first: first.index,
        second: second.index,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustReport {
    /// From the rounds that re-measured the post-state.
    pub estimate: SharpnessEstimate,
    /// Agreement rate in the rounds that used a fresh `I/d`.
    pub baseline: f64,
    pub baseline_reps: usize,
    pub honest: bool,
}

/// An honest device gives agreement `1/d` on independent `I/d` inputs;
/// flag deviations beyond four binomial standard errors.
pub fn baseline_is_honest(baseline: f64, reps: usize, d: usize) -> bool {
    let p = 1.0 / d as f64;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    (baseline - p).abs() <= 4.0 * se
}

pub fn robust_measure_twice<T: Real, B: BlackBox<T>, R: Rng + ?Sized>(
    device: &B,
    reps: usize,
    rng: &mut R,
) -> Result<RobustReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter("the robust protocol needs reps >= 2".into()));
    }
    require_post_state(device)?;
    let (mut n0, mut hits0, mut n1, mut hits1) = (0, 0, 0, 0);
    for _ in 0..reps {
        let r = robust_round(device, rng)?;
        let hit = usize::from(r.first == r.second);
        if r.coin {
            n1 += 1;
            hits1 += hit;
        } else {
            n0 += 1;
            hits0 += hit;
        }
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::InsufficientSubsample(format!(
            "all {reps} coins landed on the same side; raise reps"
        )));
    }
    let baseline = hits1 as f64 / n1 as f64;
    Ok(RobustReport {
        estimate: SharpnessEstimate::from_counts(hits0, n0),
        baseline,
        baseline_reps: n1,
        honest: baseline_is_honest(baseline, n1, device.dim()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{diagonal_kraus, make_device, Backend, Instrument, KindSpec};
    use crate::protocols::{RepeatLast, Verdict};
    use crate::qcore::{ComplexMatrix, RngStream};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn device(spec: KindSpec<f64>, backend: Backend, seed: u64) -> Device<f64> {
        let mut rng = RngStream::new(seed, 99);
        make_device(spec, Access::WithPostState, backend, &mut rng).unwrap()
    }

    fn within(est: &SharpnessEstimate, target: f64) -> bool {
        let se = (target * (1.0 - target) / est.reps as f64).sqrt();
        (est.mean - target).abs() <= 4.0 * se
    }

    #[test]
    fn projective_always_repeats() {
        for (d, backend) in [(2, Backend::Dense), (5, Backend::Dense), (1000, Backend::Fast)] {
            let dev = device(KindSpec::ProjectiveHaar { dim: d }, backend, 1);
            let mut rng = RngStream::new(1, d as u64);
            let est = measure_twice(&dev, 200, &mut rng).unwrap();
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn classical_estimates_one_over_d() {
        let dev = device(KindSpec::ClassicalUniform { dim: 4 }, Backend::Dense, 2);
        let mut rng = RngStream::new(2, 0);
        let est = measure_twice(&dev, 10_000, &mut rng).unwrap();
        assert!(within(&est, 0.25), "{est:?}");
    }

    #[test]
    fn diagonal_instrument_estimate() {
        let inst = Instrument::new(vec![
            diagonal_kraus(&[0.75f64.sqrt(), 0.25f64.sqrt()]),
            diagonal_kraus(&[0.25f64.sqrt(), 0.75f64.sqrt()]),
        ])
        .unwrap();
        let dev = device(KindSpec::Custom(inst), Backend::Dense, 3);
        let mut rng = RngStream::new(3, 0);
        let est = measure_twice(&dev, 100_000, &mut rng).unwrap();
        assert!(within(&est, 0.625), "{est:?}");
    }

    #[test]
    fn non_normal_instrument_reports_bias() {
        // K0 = |0><1|, K1 = |0><0|: both outcomes leave |0>, so the second
        // query always returns 1 while the POVM sharpness is 1.
        let mut k0 = ComplexMatrix::zeros(2, 2);
        k0[(0, 1)] = Complex64::new(1.0, 0.0);
        let mut k1 = ComplexMatrix::zeros(2, 2);
        k1[(0, 0)] = Complex64::new(1.0, 0.0);
        let inst = Instrument::new(vec![k0, k1]).unwrap();
        let dev = device(KindSpec::Custom(inst), Backend::Dense, 4);
        let mut rng = RngStream::new(4, 0);
        let report = measure_twice_with_bias(&dev, 20_000, &mut rng).unwrap();
        assert!(!report.normal);
        assert!((report.true_sharpness - 1.0).abs() < 1e-12);
        assert!(within(&report.estimate, 0.5), "{report:?}");
        assert!(report.bias > 0.4);
    }

    #[test]
    fn classical_only_device_refused() {
        let mut rng = RngStream::new(5, 0);
        let dev: Device<f64> = make_device(KindSpec::ClassicalUniform { dim: 4 }, Access::ClassicalOnly, Backend::Fast, &mut rng).unwrap();
        assert!(matches!(measure_twice(&dev, 10, &mut rng), Err(Error::Access(_))));
        assert!(matches!(robust_measure_twice(&dev, 10, &mut rng), Err(Error::Access(_))));
        let dev = device(KindSpec::ClassicalUniform { dim: 4 }, Backend::Fast, 5);
        assert!(matches!(measure_twice(&dev, 0, &mut rng), Err(Error::InvalidParameter(_))));
        assert!(matches!(robust_measure_twice(&dev, 1, &mut rng), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn decision_examples() {
        let q = decide_sharpness(&SharpnessEstimate::from_counts(16, 16), 16);
        assert_eq!(q.verdict, Verdict::Quantum);
        let c = decide_sharpness(&SharpnessEstimate::from_counts(1, 16), 16);
        assert_eq!(c.verdict, Verdict::Classical);
        let tie = decide_sharpness(&SharpnessEstimate::from_counts(2, 4), 4);
        assert_eq!(tie.verdict, Verdict::Quantum);
    }

    proptest! {
        #[test]
        fn decision_monotone_in_mean(reps in 1usize..200, a in 0usize..200, b in 0usize..200) {
            let (lo, hi) = (a.min(b).min(reps), a.max(b).min(reps));
            let dl = decide_sharpness(&SharpnessEstimate::from_counts(lo, reps), 8);
            let dh = decide_sharpness(&SharpnessEstimate::from_counts(hi, reps), 8);
            prop_assert!(!(dl.verdict == Verdict::Quantum && dh.verdict == Verdict::Classical));
        }
    }

    #[test]
    fn robust_honest_projective() {
        let dev = device(KindSpec::ProjectiveHaar { dim: 8 }, Backend::Fast, 6);
        let mut rng = RngStream::new(6, 0);
        let r = robust_measure_twice(&dev, 10_000, &mut rng).unwrap();
        assert_eq!(r.estimate.mean, 1.0);
        assert!(baseline_is_honest(r.baseline, r.baseline_reps, 8));
        assert!(r.honest);
    }

    #[test]
    fn robust_honest_classical() {
        let dev = device(KindSpec::ClassicalUniform { dim: 8 }, Backend::Fast, 7);
        let mut rng = RngStream::new(7, 0);
        let r = robust_measure_twice(&dev, 10_000, &mut rng).unwrap();
        assert!(within(&r.estimate, 0.125), "{r:?}");
        assert!(r.honest);
    }

    #[test]
    fn robust_dense_projective() {
        let dev = device(KindSpec::ProjectiveHaar { dim: 3 }, Backend::Dense, 8);
        let mut rng = RngStream::new(8, 0);
        let r = robust_measure_twice(&dev, 2_000, &mut rng).unwrap();
        assert_eq!(r.estimate.mean, 1.0);
        assert!(r.honest);
    }

    #[test]
    fn repeating_adversary_caught() {
        let adv = RepeatLast::new(8);
        let mut rng = RngStream::new(9, 0);
        let r = robust_measure_twice::<f64, _, _>(&adv, 1_000, &mut rng).unwrap();
        assert_eq!(r.estimate.mean, 1.0);
        assert_eq!(r.baseline, 1.0);
        assert!(!r.honest);
    }

    #[test]
    fn lopsided_coins_are_an_error() {
        // With two reps, both coins agree half the time.
        let dev = device(KindSpec::ClassicalUniform { dim: 4 }, Backend::Fast, 10);
        let errors = (0..200u64)
            .filter(|&s| {
                let mut rng = RngStream::new(10, s);
                matches!(robust_measure_twice(&dev, 2, &mut rng), Err(Error::InsufficientSubsample(_)))
            })
            .count();
        assert!(errors > 50 && errors < 150, "{errors}");
    }
}
