use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdmp_core::experiments::{lookup, run, verify_all, Expectation, Scenario, Sign};
use pdmp_core::lyapunov::{
    estimate_lambda_angular, estimate_lambda_lognorm, lambda_beta_sweep, write_sweep_csv,
    EstimatorOptions, GrowthRateEstimate,
};
use pdmp_core::Result;

const SIGMAS: f64 = 3.0;

#[derive(Parser)]
#[command(name = "pdmp", version, about = "Randomly switched vector fields: simulation and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every diagnostic of a scenario and write its report and CSVs.
    Simulate {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Estimate the top Lyapunov exponent of the linearized scenario.
    Lyapunov {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Estimator::Both)]
        estimator: Estimator,
    },
    /// Angular estimates over a range of switching rates.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated rate multipliers.
        #[arg(long, value_delimiter = ',', default_value = "1,3,10,30,100")]
        betas: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the full acceptance suite.
    VerifyAll {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Source {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the rate multiplier.
    #[arg(long)]
    beta: Option<f64>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replicate count (trajectories, and growth-rate estimates).
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the growth-rate estimation horizon.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Angular,
    Lognorm,
    Both,
}

impl Source {
    fn load(&self) -> Result<Scenario> {
        let mut s = match (&self.scenario, &self.config) {
            (Some(name), _) => lookup(name)?,
            (None, Some(path)) => Scenario::from_json(&fs::read_to_string(path)?)?,
            (None, None) => unreachable!("clap requires one source"),
        };
        if let Some(beta) = self.beta {
            s = s.with_beta(beta);
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(n) = self.replicates {
            s.replicates = n;
            s.lyapunov.replicates = n;
        }
        if let Some(t) = self.horizon {
            s.lyapunov.horizon = t;
        }
        s.validate()?;
        Ok(s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { source, out } => simulate(&source, &out),
        Command::Lyapunov { source, estimator } => lyapunov(&source, estimator),
        Command::Sweep { source, betas, out } => sweep(&source, &betas, &out),
        Command::VerifyAll { out } => verify_all(&out).map(|s| s.passed),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn simulate(source: &Source, out: &Path) -> Result<bool> {
    let s = source.load()?;
    let report = run(&s, out)?;
    for c in &report.checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        println!("{tag} {} [{:?}] {}", c.check, c.provenance, c.detail);
    }
    for f in report.failures() {
        eprintln!("failure: {f}");
    }
    println!(
        "{}: {} in {:.1}s, report at {}",
        s.name,
        if report.passed { "passed" } else { "FAILED" },
        report.wall_clock_seconds,
        out.join("report.json").display()
    );
    Ok(report.passed)
}

fn lyapunov(source: &Source, which: Estimator) -> Result<bool> {
    let s = source.load()?;
    let sys = s.linear_system()?;
    let opts = EstimatorOptions {
        step: s.lyapunov.step,
        ..EstimatorOptions::default()
    };
    let (t, n) = (s.lyapunov.horizon, s.lyapunov.replicates);
    let mut estimates: Vec<GrowthRateEstimate> = Vec::new();
    if which != Estimator::Lognorm {
        estimates.push(estimate_lambda_angular(&sys, t, n, s.seed, &opts)?);
    }
    if which != Estimator::Angular {
        estimates.push(estimate_lambda_lognorm(&sys, t, n, s.seed, &opts)?);
    }
    let mut passed = true;
    for e in &estimates {
        println!(
            "{:?}: lambda_hat = {:.6} ± {:.6} (T = {}, N = {}, seed {})",
            e.estimator, e.value, e.stderr, e.horizon, e.replicates, e.seed
        );
    }
    if let [a, b] = estimates.as_slice() {
        let diff = (a.value - b.value).abs();
        let tol = SIGMAS * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        println!("estimator difference {diff:.3e} vs 3 sigma {tol:.3e}");
        passed &= diff <= tol;
    }
    for band in &s.expectations {
        if let Expectation::LambdaSign { sign } = band.expectation {
            let want = match sign {
                Sign::Negative => -1.0,
                Sign::Positive => 1.0,
            };
            for e in &estimates {
                let ok = e.significant_sign(SIGMAS) == Some(want);
                println!("{} expected {sign:?} at beta = {}: {:?} {}", if ok { "ok  " } else { "FAIL" }, s.rates.beta, e.estimator, band.source);
                passed &= ok;
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&estimates)?);
    Ok(passed)
}

fn sweep(source: &Source, betas: &[f64], out: &Path) -> Result<bool> {
    let s = source.load()?;
    let sys = s.linear_system()?;
    let opts = EstimatorOptions {
        step: s.lyapunov.step,
        ..EstimatorOptions::default()
    };
    let points = lambda_beta_sweep(
        sys.matrices(),
        &s.rates.base,
        sys.cone(),
        betas,
        s.lyapunov.horizon,
        s.lyapunov.replicates,
        s.seed,
        &opts,
    )?;
    for p in &points {
        println!("beta = {:>8}: lambda_hat = {:.6} ± {:.6}", p.beta, p.estimate.value, p.estimate.stderr);
    }
    fs::create_dir_all(out)?;
    let path = out.join("fig_lambda_beta.csv");
    write_sweep_csv(&points, BufWriter::new(File::create(&path)?))?;
    println!("wrote {}", path.display());
    Ok(true)
}
