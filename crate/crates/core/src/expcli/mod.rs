//! Experiment driver: configuration, seeded trial execution and CSV/JSON
//! persistence.
//!
//! Each run produces aggregated [`ResultRow`]s (one per experiment cell),
//! optional raw trial rows, and a summary sidecar next to the CSV.

mod io;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use io::{
    append_csv, parse_csv, read_csv, render_csv, summary_path, trials_path, write_json, ResultRow, TrialRow,
    CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::haarverify::{cycle_sum_identity, tv_iid_exact, tv_iid_protocol, weingarten_table, wg_identity_gap};
use crate::measure::{Backend, Hypothesis};
use crate::protocols::{controlled_swap_equivalence_check, default_collision_queries};
use crate::qcore::{RngStream, DEFAULT_SEED};
use crate::stats::{
    collision_success, measure_twice_success, minimal_query_search, minimal_reps_search, scaling_exponent, Prior,
    ScalingFit, ScalingPoint, SuccessEstimate, TrialRunner,
};

const TABLE_RESIDUAL_TOL: f64 = 1e-8;
const CYCLE_SUM_REL_TOL: f64 = 1e-10;
const DEFAULT_CSWAP_SHOTS: usize = 100_000;
const DEFAULT_TV_T: usize = 2;
const DEFAULT_WEINGARTEN_T_MAX: usize = 4;

/// Stream for trial `trial` of `experiment` under the master seed.
pub fn derive_seed(master: u64, experiment: &str, trial: u64) -> RngStream {
    RngStream::derive(master, experiment, trial)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Collision,
    MeasureTwice,
    Robust,
    Sweep,
    VerifyWeingarten,
    VerifyTv,
    VerifyCswap,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Collision,
        Experiment::MeasureTwice,
        Experiment::Robust,
        Experiment::Sweep,
        Experiment::VerifyWeingarten,
        Experiment::VerifyTv,
        Experiment::VerifyCswap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Collision => "collision",
            Experiment::MeasureTwice => "measure-twice",
            Experiment::Robust => "robust",
            Experiment::Sweep => "sweep",
            Experiment::VerifyWeingarten => "verify-weingarten",
            Experiment::VerifyTv => "verify-tv",
            Experiment::VerifyCswap => "verify-cswap",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown experiment `{s}`")))
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub dims: Vec<usize>,
    /// Collision queries; defaults to `⌈20√d⌉`.
    pub n_queries: Option<usize>,
    /// Measuring-twice repetitions, or controlled-SWAP shots.
    pub reps: Option<usize>,
    /// Copies `T` for `verify-tv`, largest `T` for `verify-weingarten`.
    pub t: Option<usize>,
    pub trials: usize,
    pub target: f64,
    pub seed: u64,
    pub backend: Backend,
    pub out: Option<PathBuf>,
    pub robust: bool,
    pub per_trial: bool,
    pub parallel: bool,
    /// Wall-clock timings make CSV bodies run-dependent, so they are off
    /// unless requested.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: String::new(),
            dims: Vec::new(),
            n_queries: None,
            reps: None,
            t: None,
            trials: 400,
            target: 2.0 / 3.0,
            seed: DEFAULT_SEED,
            backend: Backend::Fast,
            out: None,
            robust: false,
            per_trial: false,
            parallel: true,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, dims: Vec<usize>) -> Self {
        Self {
            experiment: experiment.name().to_string(),
            dims,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<Experiment> {
        let exp: Experiment = self.experiment.parse()?;
        if self.trials == 0 {
            return Err(Error::Usage("trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Usage("at least one dimension is required".into()));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(Error::Usage(format!("dimensions must be at least 2, got {d}")));
        }
        if exp == Experiment::Sweep && !(self.target > 0.5 && self.target < 1.0) {
            return Err(Error::Usage(format!("target must lie in (0.5, 1), got {}", self.target)));
        }
        if matches!(exp, Experiment::MeasureTwice | Experiment::Robust) && self.reps.is_none() {
            return Err(Error::Usage("measure-twice needs --reps".into()));
        }
        if self.reps == Some(0) || self.n_queries.is_some_and(|n| n < 2) {
            return Err(Error::Usage("reps must be positive and N at least 2".into()));
        }
        Ok(exp)
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    fn runner(&self) -> TrialRunner {
        TrialRunner {
            seed: self.seed,
            parallel: self.parallel,
        }
    }
}

/// Outcome of one named check in a verification experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub d: usize,
    pub t: usize,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepFits {
    pub collision: Option<ScalingFit>,
    pub measure_twice: Option<ScalingFit>,
    pub collision_points: Vec<ScalingPoint>,
    pub measure_twice_points: Vec<ScalingPoint>,
}

/// Contents of the `.summary.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub version: String,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<SweepFits>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRecord>,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<ResultRow>,
    pub trial_rows: Vec<TrialRow>,
    pub summary: Summary,
}

impl Report {
    pub fn violations(&self) -> usize {
        self.summary.violations
    }
}

struct Builder<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<ResultRow>,
    trial_rows: Vec<TrialRow>,
    checks: Vec<CheckRecord>,
    fits: Option<SweepFits>,
}

fn hypothesis_name(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::Classical => "classical",
        Hypothesis::Quantum => "quantum",
    }
}

impl Builder<'_> {
    fn elapsed(&self, start: Instant) -> u64 {
        if self.cfg.record_timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    fn push_estimate(&mut self, experiment: String, d: usize, n: usize, est: &SuccessEstimate, start: Instant) {
        let row = ResultRow {
            experiment: experiment.clone(),
            d,
            n_queries: n,
            trials: est.trials,
            successes: est.successes,
            success_rate: est.successes as f64 / est.trials as f64,
            mean: est.statistic_mean,
            stderr: est.statistic_stderr,
            seed: self.cfg.seed,
            backend: self.cfg.backend.to_string(),
            elapsed_ms: self.elapsed(start),
        };
        self.rows.push(row);
        if self.cfg.per_trial {
            self.trial_rows.extend(est.records.iter().map(|r| TrialRow {
                experiment: experiment.clone(),
                d,
                n_queries: n,
                trial: r.trial,
                truth: hypothesis_name(r.truth).into(),
                verdict: hypothesis_name(r.verdict).into(),
                statistic: r.statistic,
                flagged: r.flagged,
            }));
        }
    }

    fn push_check(&mut self, experiment: &str, check: CheckRecord, start: Instant) {
        self.rows.push(ResultRow {
            experiment: experiment.to_string(),
            d: check.d,
            n_queries: check.t,
            trials: 1,
            successes: usize::from(check.passed),
            success_rate: if check.passed { 1.0 } else { 0.0 },
            mean: check.value,
            stderr: 0.0,
            seed: self.cfg.seed,
            backend: Backend::Dense.to_string(),
            elapsed_ms: self.elapsed(start),
        });
        self.checks.push(check);
    }

    fn priors() -> [(Prior, &'static str); 3] {
        [
            (Prior::Fair, ""),
            (Prior::Fixed(Hypothesis::Classical), "/classical"),
            (Prior::Fixed(Hypothesis::Quantum), "/quantum"),
        ]
    }

    fn collision(&mut self) -> Result<()> {
        let cfg = self.cfg;
        for &d in &cfg.dims {
            let n = cfg.n_queries.unwrap_or_else(|| default_collision_queries(d));
            for (prior, suffix) in Self::priors() {
                let start = Instant::now();
                let name = format!("collision{suffix}");
                let label = format!("{name}/d={d}/n={n}");
                let est = collision_success(&cfg.runner(), &label, d, n, cfg.trials, prior, cfg.backend)?;
                self.push_estimate(name, d, n, &est, start);
            }
        }
        Ok(())
    }

    fn measure_twice(&mut self, robust: bool) -> Result<()> {
        let cfg = self.cfg;
        let reps = cfg.reps.expect("validated");
        let base = if robust { "robust" } else { "measure-twice" };
        for &d in &cfg.dims {
            for (prior, suffix) in Self::priors() {
                let start = Instant::now();
                let name = format!("{base}{suffix}");
                let label = format!("{name}/d={d}/reps={reps}");
                let est =
                    measure_twice_success(&cfg.runner(), &label, d, reps, cfg.trials, prior, cfg.backend, robust)?;
                self.push_estimate(name, d, reps, &est, start);
            }
        }
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let mut fits = SweepFits {
            collision: None,
            measure_twice: None,
            collision_points: Vec::new(),
            measure_twice_points: Vec::new(),
        };
        for &d in &cfg.dims {
            let searches = [
                ("sweep/collision", minimal_query_search(&cfg.runner(), d, cfg.target, cfg.trials)),
                ("sweep/measure-twice", minimal_reps_search(&cfg.runner(), d, cfg.target, cfg.trials)),
            ];
            for (name, outcome) in searches {
                let start = Instant::now();
                let outcome = outcome?;
                let successes = (outcome.rate * cfg.trials as f64).round() as usize;
                self.rows.push(ResultRow {
                    experiment: name.into(),
                    d,
                    n_queries: outcome.n_min,
                    trials: cfg.trials,
                    successes,
                    success_rate: successes as f64 / cfg.trials as f64,
                    mean: outcome.n_min as f64 / (d as f64).sqrt(),
                    stderr: 0.0,
                    seed: cfg.seed,
                    backend: Backend::Fast.to_string(),
                    elapsed_ms: self.elapsed(start),
                });
                let point = ScalingPoint { d, n_min: outcome.n_min };
                if name == "sweep/collision" {
                    fits.collision_points.push(point);
                } else {
                    fits.measure_twice_points.push(point);
                }
            }
        }
        fits.collision = scaling_exponent(&fits.collision_points).ok();
        fits.measure_twice = scaling_exponent(&fits.measure_twice_points).ok();
        self.fits = Some(fits);
        Ok(())
    }

    fn verify_weingarten(&mut self) -> Result<()> {
        let t_max = self.cfg.t.unwrap_or(DEFAULT_WEINGARTEN_T_MAX);
        if !(1..=8).contains(&t_max) {
            return Err(Error::Usage(format!("--t-max must lie in 1..=8, got {t_max}")));
        }
        for &d in &self.cfg.dims {
            for t in 1..=t_max {
                if t <= 5 && t <= d {
                    let start = Instant::now();
                    let residual = match weingarten_table::<f64>(t, d) {
                        Ok(table) => table.inverse_residual(),
                        Err(Error::Validation(_)) => f64::INFINITY,
                        Err(e) => return Err(e),
                    };
                    let check = CheckRecord {
                        name: "inverse".into(),
                        d,
                        t,
                        value: residual.min(f64::MAX),
                        bound: TABLE_RESIDUAL_TOL,
                        passed: residual <= TABLE_RESIDUAL_TOL,
                        details: serde_json::Value::Null,
                    };
                    self.push_check("verify-weingarten/inverse", check, start);
                }
                if t <= 5 && t * t <= d {
                    let start = Instant::now();
                    let gap = wg_identity_gap(t, d)?;
                    let check = CheckRecord {
                        name: "gap".into(),
                        d,
                        t,
                        value: gap.entrywise,
                        bound: gap.bound,
                        passed: gap.holds,
                        details: serde_json::json!({ "induced": gap.induced }),
                    };
                    self.push_check("verify-weingarten/gap", check, start);
                }
                let start = Instant::now();
                let (lhs, rhs) = cycle_sum_identity(t, d)?;
                let rel = (lhs - rhs).abs() / rhs.abs();
                let check = CheckRecord {
                    name: "cycle-sum".into(),
                    d,
                    t,
                    value: rel,
                    bound: CYCLE_SUM_REL_TOL,
                    passed: rel <= CYCLE_SUM_REL_TOL,
                    details: serde_json::json!({ "lhs": lhs, "rhs": rhs }),
                };
                self.push_check("verify-weingarten/cycle-sum", check, start);
            }
        }
        Ok(())
    }

    fn verify_tv(&mut self) -> Result<()> {
        let t = self.cfg.t.unwrap_or(DEFAULT_TV_T);
        for &d in &self.cfg.dims {
            let start = Instant::now();
            let r = tv_iid_protocol(d, t)?;
            let exact = tv_iid_exact(d, t)?;
            let check = CheckRecord {
                name: "tv".into(),
                d,
                t,
                value: r.tv,
                bound: r.bound,
                passed: r.holds,
                details: serde_json::json!({ "exact": exact.to_string() }),
            };
            self.push_check("verify-tv", check, start);
        }
        Ok(())
    }

    fn verify_cswap(&mut self) -> Result<()> {
        let shots = self.cfg.reps.unwrap_or(DEFAULT_CSWAP_SHOTS);
        for &d in &self.cfg.dims {
            let start = Instant::now();
            let mut rng = derive_seed(self.cfg.seed, &format!("verify-cswap/d={d}"), 0);
            let report = controlled_swap_equivalence_check(d, shots, &mut rng)?;
            for case in &report.cases {
                let check = CheckRecord {
                    name: case.device.clone(),
                    d,
                    t: 2,
                    value: case.max_table_diff,
                    bound: 1e-10,
                    passed: report.passed,
                    details: serde_json::to_value(case)?,
                };
                self.push_check(&format!("verify-cswap/{}", case.device), check, start);
            }
        }
        Ok(())
    }
}

/// Runs the configured experiment without touching the filesystem.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let exp = cfg.validate()?;
    let mut b = Builder {
        cfg,
        rows: Vec::new(),
        trial_rows: Vec::new(),
        checks: Vec::new(),
        fits: None,
    };
    match exp {
        Experiment::Collision => b.collision()?,
        Experiment::MeasureTwice => b.measure_twice(cfg.robust)?,
        Experiment::Robust => b.measure_twice(true)?,
        Experiment::Sweep => b.sweep()?,
        Experiment::VerifyWeingarten => b.verify_weingarten()?,
        Experiment::VerifyTv => b.verify_tv()?,
        Experiment::VerifyCswap => b.verify_cswap()?,
    }
    for row in &b.rows {
        row.validate()?;
    }
    let violations = b.checks.iter().filter(|c| !c.passed).count();
    let summary = Summary {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rows: b.rows.len(),
        fits: b.fits,
        checks: b.checks,
        violations,
    };
    Ok(Report {
        rows: b.rows,
        trial_rows: b.trial_rows,
        summary,
    })
}

/// Appends the rows to `cfg.out`, and writes the summary sidecar and the
/// optional per-trial CSV next to it.
pub fn write_outputs(cfg: &ExperimentConfig, report: &Report) -> Result<()> {
    let Some(out) = &cfg.out else {
        return Ok(());
    };
    append_csv(out, &report.rows, CSV_HEADER)?;
    write_json(&summary_path(out), &report.summary)?;
    if cfg.per_trial {
        append_csv(
            &trials_path(out),
            &report.trial_rows,
            "experiment,d,n_queries,trial,truth,verdict,statistic,flagged",
        )?;
    }
    Ok(())
}

/// [`run_experiment`] followed by [`write_outputs`].
pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    let report = run_experiment(cfg)?;
    write_outputs(cfg, &report)?;
    Ok(report)
}
