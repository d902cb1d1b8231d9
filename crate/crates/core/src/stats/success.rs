use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{make_device, Access, Backend, Device, Hypothesis, KindSpec};
use crate::protocols::{collision_test_counted, decide_sharpness, measure_twice, robust_measure_twice, Decision};
use crate::qcore::RngStream;

const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Executes independent trials on per-trial streams derived from
/// `(seed, label, trial)`. Output is ordered by trial index, so serial and
/// parallel runs agree exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRunner {
    pub seed: u64,
    pub parallel: bool,
}

impl TrialRunner {
    pub fn new(seed: u64) -> Self {
        Self { seed, parallel: true }
    }

    pub fn serial(seed: u64) -> Self {
        Self { seed, parallel: false }
    }

    pub fn run<O, F>(&self, label: &str, trials: usize, f: F) -> Result<Vec<O>>
    where
        O: Send,
        F: Fn(usize, &mut RngStream) -> Result<O> + Sync,
    {
        let one = |t: usize| {
            let mut rng = RngStream::derive(self.seed, label, t as u64);
            f(t, &mut rng)
        };
        if self.parallel {
            (0..trials).into_par_iter().map(one).collect()
        } else {
            (0..trials).map(one).collect()
        }
    }
}

/// Which hypothesis each trial draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prior {
    /// Fair coin per trial.
    Fair,
    Fixed(Hypothesis),
}

impl Prior {
    fn spec(self, dim: usize) -> KindSpec<f64> {
        match self {
            Prior::Fair => KindSpec::RandomHypothesis { dim },
            Prior::Fixed(Hypothesis::Classical) => KindSpec::ClassicalUniform { dim },
            Prior::Fixed(Hypothesis::Quantum) => KindSpec::ProjectiveHaar { dim },
        }
    }
}

/// One trial: the hidden hypothesis, the verdict and the test statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub truth: Hypothesis,
    pub verdict: Hypothesis,
    pub statistic: f64,
    /// Robust variant only: the honesty baseline was rejected.
    pub flagged: bool,
}

impl TrialRecord {
    pub fn correct(&self) -> bool {
        self.truth == self.verdict
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub successes: usize,
    pub trials: usize,
}

impl Tally {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Aggregate over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub classical: Tally,
    pub quantum: Tally,
    /// Mean and standard error of the statistic over all trials.
    pub statistic_mean: f64,
    pub statistic_stderr: f64,
    pub flagged: usize,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl SuccessEstimate {
    pub fn from_records(records: Vec<TrialRecord>) -> Self {
        let trials = records.len();
        let successes = records.iter().filter(|r| r.correct()).count();
        let (lower, upper) = wilson_interval(successes, trials);
        let mut classical = Tally::default();
        let mut quantum = Tally::default();
        for r in &records {
            let t = match r.truth {
                Hypothesis::Classical => &mut classical,
                Hypothesis::Quantum => &mut quantum,
            };
            t.trials += 1;
            t.successes += usize::from(r.correct());
        }
        let (statistic_mean, statistic_stderr) = mean_stderr(records.iter().map(|r| r.statistic));
        Self {
            trials,
            successes,
            rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            lower,
            upper,
            classical,
            quantum,
            statistic_mean,
            statistic_stderr,
            flagged: records.iter().filter(|r| r.flagged).count(),
            records,
        }
    }
}

fn mean_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    Ok(())
}

fn record(trial: usize, device: &Device<f64>, decision: Decision, flagged: bool) -> TrialRecord {
    TrialRecord {
        trial,
        truth: device.hypothesis().unwrap_or(Hypothesis::Quantum),
        verdict: decision.verdict,
        statistic: decision.statistic,
        flagged,
    }
}

/// Collision test on freshly sampled devices.
pub fn collision_success(
    runner: &TrialRunner,
    label: &str,
    d: usize,
    n: usize,
    trials: usize,
    prior: Prior,
    backend: Backend,
) -> Result<SuccessEstimate> {
    require_trials(trials)?;
    let records = runner.run(label, trials, |t, rng| {
        let device = make_device(prior.spec(d), Access::ClassicalOnly, backend, rng)?;
        let outcome = collision_test_counted(&device, n, rng)?;
        Ok(record(t, &device, outcome.decision, false))
    })?;
    Ok(SuccessEstimate::from_records(records))
}

/// Fair-prior collision-test success on the fast backend.
pub fn empirical_success(runner: &TrialRunner, d: usize, n: usize, trials: usize) -> Result<SuccessEstimate> {
    collision_success(
        runner,
        &format!("collision/d={d}/n={n}"),
        d,
        n,
        trials,
        Prior::Fair,
        Backend::Fast,
    )
}

/// Measuring-twice success on freshly sampled devices.
///
/// With `robust`, each trial runs `2·reps` coin-routed rounds so that about
/// `reps` of them feed the estimate. A trial whose coins all land on one side
/// produces no estimate and is scored as a `Classical` verdict.
#[allow(clippy::too_many_arguments)]
pub fn measure_twice_success(
    runner: &TrialRunner,
    label: &str,
    d: usize,
    reps: usize,
    trials: usize,
    prior: Prior,
    backend: Backend,
    robust: bool,
) -> Result<SuccessEstimate> {
    require_trials(trials)?;
    let records = runner.run(label, trials, |t, rng| {
        let device = make_device(prior.spec(d), Access::WithPostState, backend, rng)?;
        if !robust {
            let est = measure_twice(&device, reps, rng)?;
            return Ok(record(t, &device, decide_sharpness(&est, d), false));
        }
        match robust_measure_twice(&device, 2 * reps, rng) {
            Ok(report) => Ok(record(t, &device, decide_sharpness(&report.estimate, d), !report.honest)),
            Err(Error::InsufficientSubsample(_)) => {
                Ok(record(t, &device, Decision::from_threshold(0.0, 1.0), false))
            }
            Err(e) => Err(e),
        }
    })?;
    Ok(SuccessEstimate::from_records(records))
}
