use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sharpsep::expcli::{execute, Experiment, ExperimentConfig, Report};
use sharpsep::measure::{parse_operator_file, sharpness, Backend};
use sharpsep::qcore::DEFAULT_SEED;
use sharpsep::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "sharpsep", version, about = "Sharpness-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunOpts {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write raw trial rows to `<out>.trials.csv`.
    #[arg(long)]
    per_trial: bool,
    /// Run trials on one thread; output is identical either way.
    #[arg(long)]
    serial: bool,
    /// Record wall-clock time in `elapsed_ms` (otherwise 0).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Collision test with classical-only access.
    Collision {
        #[arg(long)]
        d: usize,
        /// Queries per test; defaults to ceil(20·sqrt(d)).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value = "fast")]
        backend: Backend,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Measuring twice with post-measurement-state access.
    MeasureTwice {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        trials: usize,
        /// Coin-routed variant with the honesty baseline.
        #[arg(long)]
        robust: bool,
        #[arg(long, default_value = "fast")]
        backend: Backend,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Minimal query counts across dimensions and fitted exponents.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        target: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Prints the sharpness of a POVM or instrument file.
    Sharpness {
        #[arg(long)]
        povm: PathBuf,
    },
    /// Numerical checks; exit status 3 on any violation.
    Verify {
        #[command(subcommand)]
        check: Verify,
    },
    /// Runs an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum Verify {
    Weingarten {
        #[arg(long)]
        t_max: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Tv {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Cswap {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100_000)]
        shots: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn with_opts(mut cfg: ExperimentConfig, opts: &RunOpts, out: PathBuf) -> ExperimentConfig {
    cfg.seed = opts.seed;
    cfg.per_trial = opts.per_trial;
    cfg.parallel = !opts.serial;
    cfg.record_timing = opts.timing;
    cfg.out = Some(out);
    cfg
}

/// Formats `x` with 12 significant digits.
fn significant(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.11}");
    }
    let decimals = (11 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn build(command: Command) -> Result<ExperimentConfig, Error> {
    let cfg = match command {
        Command::Collision {
            d,
            n,
            trials,
            backend,
            out,
            opts,
        } => {
            let mut cfg = ExperimentConfig::new(Experiment::Collision, vec![d]);
            cfg.n_queries = n;
            cfg.trials = trials;
            cfg.backend = backend;
            with_opts(cfg, &opts, out)
        }
        Command::MeasureTwice {
            d,
            reps,
            trials,
            robust,
            backend,
            out,
            opts,
        } => {
            let exp = if robust { Experiment::Robust } else { Experiment::MeasureTwice };
            let mut cfg = ExperimentConfig::new(exp, vec![d]);
            cfg.reps = Some(reps);
            cfg.trials = trials;
            cfg.robust = robust;
            cfg.backend = backend;
            with_opts(cfg, &opts, out)
        }
        Command::Sweep {
            dims,
            target,
            trials,
            out,
            opts,
        } => {
            let mut cfg = ExperimentConfig::new(Experiment::Sweep, dims);
            cfg.target = target;
            cfg.trials = trials;
            with_opts(cfg, &opts, out)
        }
        Command::Verify { check } => match check {
            Verify::Weingarten { t_max, d, out } => ExperimentConfig {
                t: Some(t_max),
                out,
                trials: 1,
                ..ExperimentConfig::new(Experiment::VerifyWeingarten, vec![d])
            },
            Verify::Tv { d, t, out } => ExperimentConfig {
                t: Some(t),
                out,
                trials: 1,
                ..ExperimentConfig::new(Experiment::VerifyTv, vec![d])
            },
            Verify::Cswap { d, shots, seed, out } => ExperimentConfig {
                reps: Some(shots),
                seed,
                out,
                trials: 1,
                ..ExperimentConfig::new(Experiment::VerifyCswap, vec![d])
            },
        },
        Command::Run { config } => ExperimentConfig::from_json_file(&config)?,
        Command::Sharpness { .. } => unreachable!("handled before building a config"),
    };
    Ok(cfg)
}

fn report(r: &Report) {
    for row in &r.rows {
        println!(
            "{} d={} n={} success={}/{} ({:.4}) mean={} stderr={}",
            row.experiment,
            row.d,
            row.n_queries,
            row.successes,
            row.trials,
            row.success_rate,
            significant(row.mean),
            significant(row.stderr)
        );
    }
    if let Some(fits) = &r.summary.fits {
        if let Some(f) = fits.collision {
            println!("collision exponent {:.4} (rms residual {:.4})", f.slope, f.residual);
        }
        if let Some(f) = fits.measure_twice {
            println!("measure-twice exponent {:.4} (rms residual {:.4})", f.slope, f.residual);
        }
    }
    for c in r.summary.checks.iter().filter(|c| !c.passed) {
        println!("VIOLATION {} d={} T={}: {} > {}", c.name, c.d, c.t, c.value, c.bound);
    }
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Usage(_) | Error::InvalidParameter(_) | Error::DegenerateDimension(_) => ExitCode::from(EXIT_USAGE),
        _ => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Sharpness { povm } = &cli.command {
        return match parse_operator_file(povm) {
            Ok(ops) => {
                println!("{}", significant(sharpness(&ops.povm())));
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        };
    }
    let cfg = match build(cli.command) {
        Ok(cfg) => cfg,
        Err(e) => return exit_for(&e),
    };
    match execute(&cfg) {
        Ok(r) => {
            report(&r);
            if r.violations() > 0 {
                ExitCode::from(EXIT_VIOLATION)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => exit_for(&e),
    }
}
