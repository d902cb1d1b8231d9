use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::success::{collision_success, measure_twice_success, Prior, TrialRunner};
use crate::error::{Error, Result};
use crate::measure::Backend;

/// Largest repetition count tried by [`minimal_reps_search`].
pub const MEASURE_TWICE_REPS_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d: usize,
    pub n_min: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Result of a minimal-parameter search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub n_min: usize,
    pub rate: f64,
    /// Every evaluated `(n, rate)` in ascending `n`.
    pub evaluations: Vec<(usize, f64)>,
}

fn require_target(target: f64) -> Result<()> {
    if !(target > 0.5 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("target must lie in (0.5, 1), got {target}")));
    }
    Ok(())
}

/// Doubles from `start` until `rate(n) ≥ target`, then bisects between the
/// last failing and first passing values. Fails once `cap` itself misses.
pub fn search_minimal<F>(start: usize, cap: usize, target: f64, mut rate: F) -> Result<SearchOutcome>
where
    F: FnMut(usize) -> Result<f64>,
{
    require_target(target)?;
    if start == 0 || start > cap {
        return Err(Error::InvalidParameter(format!("need 1 <= start <= cap, got {start} and {cap}")));
    }
    let mut seen = BTreeMap::new();
    let mut eval = |n: usize| -> Result<f64> {
        if let Some(&r) = seen.get(&n) {
            return Ok(r);
        }
        let r = rate(n)?;
        seen.insert(n, r);
        Ok(r)
    };

    let mut lo = None;
    let mut hi = start;
    while eval(hi)? < target {
        if hi >= cap {
            return Err(Error::SearchFailure(format!(
                "target {target} not reached by n = {cap}"
            )));
        }
        lo = Some(hi);
        hi = (2 * hi).min(cap);
    }
    if let Some(mut lo) = lo {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if eval(mid)? >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let rate = eval(hi)?;
    Ok(SearchOutcome {
        n_min: hi,
        rate,
        evaluations: seen.into_iter().collect(),
    })
}

/// Smallest collision-test `N` whose fair-prior success reaches `target`,
/// searched over `2..=⌈64√d⌉`.
pub fn minimal_query_search(runner: &TrialRunner, d: usize, target: f64, trials: usize) -> Result<SearchOutcome> {
    let cap = (64.0 * (d as f64).sqrt()).ceil() as usize;
    search_minimal(2, cap.max(2), target, |n| {
        let label = format!("sweep/collision/d={d}/n={n}");
        Ok(collision_success(runner, &label, d, n, trials, Prior::Fair, Backend::Fast)?.rate)
    })
}

/// Smallest measuring-twice repetition count whose fair-prior success
/// reaches `target`, searched over `1..=64`.
pub fn minimal_reps_search(runner: &TrialRunner, d: usize, target: f64, trials: usize) -> Result<SearchOutcome> {
    search_minimal(1, MEASURE_TWICE_REPS_CAP, target, |reps| {
        let label = format!("sweep/measure-twice/d={d}/reps={reps}");
        Ok(measure_twice_success(runner, &label, d, reps, trials, Prior::Fair, Backend::Fast, false)?.rate)
    })
}

/// Least-squares fit of `log n_min = slope·log d + intercept`.
pub fn scaling_exponent(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut ds: Vec<usize> = points.iter().map(|p| p.d).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() != points.len() {
        return Err(Error::InvalidParameter("dimensions must be distinct".into()));
    }
    if points.iter().any(|p| p.d == 0 || p.n_min == 0) {
        return Err(Error::InvalidParameter("d and n_min must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.d as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.n_min as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = [16usize, 64, 256, 1024]
            .iter()
            .map(|&d| ScalingPoint { d, n_min: 20 * (d as f64).sqrt() as usize })
            .collect();
        let fit = scaling_exponent(&pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!((fit.intercept - 20f64.ln()).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn constant_points() {
        let pts: Vec<_> = [4usize, 16, 64].iter().map(|&d| ScalingPoint { d, n_min: 7 }).collect();
        assert!(scaling_exponent(&pts).unwrap().slope.abs() < 1e-9);
    }

    #[test]
    fn fit_preconditions() {
        let p = ScalingPoint { d: 4, n_min: 3 };
        assert!(scaling_exponent(&[p, ScalingPoint { d: 8, n_min: 4 }]).is_err());
        assert!(scaling_exponent(&[p, p, ScalingPoint { d: 8, n_min: 4 }]).is_err());
    }

    #[test]
    fn search_on_a_step_function() {
        let out = search_minimal(2, 1000, 2.0 / 3.0, |n| Ok(if n >= 37 { 0.9 } else { 0.4 })).unwrap();
        assert_eq!(out.n_min, 37);
        assert!(out.evaluations.windows(2).all(|w| w[0].0 < w[1].0));
        let out = search_minimal(2, 1000, 0.6, |_| Ok(0.9)).unwrap();
        assert_eq!(out.n_min, 2);
        assert!(matches!(
            search_minimal(2, 50, 0.6, |_| Ok(0.1)),
            Err(Error::SearchFailure(_))
        ));
        assert!(search_minimal(2, 50, 0.5, |_| Ok(0.9)).is_err());
    }

    #[test]
    fn collision_search_at_16() {
        let out = minimal_query_search(&TrialRunner::new(21), 16, 2.0 / 3.0, 400).unwrap();
        assert!(out.n_min <= 80, "{out:?}");
        assert!(out.rate >= 2.0 / 3.0);
    }

    #[test]
    fn reps_search_is_small() {
        for d in [4, 256] {
            let out = minimal_reps_search(&TrialRunner::new(22), d, 2.0 / 3.0, 200).unwrap();
            assert!(out.n_min <= 20, "{out:?}");
        }
    }

    #[test]
    fn search_is_deterministic() {
        let a = minimal_query_search(&TrialRunner::new(23), 16, 2.0 / 3.0, 200).unwrap();
        let b = minimal_query_search(&TrialRunner::serial(23), 16, 2.0 / 3.0, 200).unwrap();
        assert_eq!(a, b);
    }
}
