use std::io::Write;

use serde::{Deserialize, Serialize};

use super::angular::{random_direction, run_angular, stationary_mode};
use super::system::LinearSwitchedSystem;
use crate::error::{Error, Result};
use crate::matrixcore::{RateMatrix, SquareMatrix};
use crate::parallel::map_replicates;
use crate::pdmp::rng::{categorical, exponential, stream, Stream};
use crate::stats::RunningStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Time average of `⟨A^J Θ, Θ⟩` along the angular process.
    AngularAverage,
    /// `(1/T) log ‖Y_T‖` with periodic renormalization.
    LogNorm,
}

/// Replicate mean of a growth-rate estimator with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRateEstimate {
    pub value: f64,
    pub stderr: f64,
    pub horizon: f64,
    pub replicates: usize,
    pub burn_in_fraction: f64,
    pub estimator: EstimatorKind,
    pub step: f64,
    pub seed: u64,
}

impl GrowthRateEstimate {
    /// Whether `x` lies in `value ± k·stderr`.
    pub fn covers(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.stderr
    }

    /// Sign of the estimate when zero lies outside `value ± k·stderr`.
    pub fn significant_sign(&self, k: f64) -> Option<f64> {
        if self.covers(0.0, k) {
            None
        } else {
            Some(self.value.signum())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    /// RK4 step.
    pub step: f64,
    /// Fraction of the horizon discarded before time-averaging (angular only).
    pub burn_in: f64,
    /// Renormalization cadence of the log-norm estimator, in time units.
    pub renorm_every: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            step: 1e-2,
            burn_in: 0.1,
            renorm_every: 1.0,
        }
    }
}

const OVERFLOW_GUARD: f64 = 1e100;

fn validate(horizon: f64, replicates: usize, opts: &EstimatorOptions) -> Result<()> {
    if replicates == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::Config(format!("horizon {horizon} must be positive")));
    }
    if !(opts.step > 0.0) {
        return Err(Error::Config(format!("step {} must be positive", opts.step)));
    }
    if !(0.0..1.0).contains(&opts.burn_in) {
        return Err(Error::Config(format!("burn-in fraction {} must be in [0, 1)", opts.burn_in)));
    }
    if !(opts.renorm_every > 0.0) {
        return Err(Error::Config("renormalization cadence must be positive".into()));
    }
    Ok(())
}

fn reduce(values: Vec<Result<f64>>) -> Result<RunningStats> {
    let mut stats = RunningStats::new();
    for v in values {
        stats.push(v?);
    }
    Ok(stats)
}

/// `λ̂₁` = replicate mean of `(1/(T − T_b)) ∫_{T_b}^T ⟨A^{J_s}Θ_s, Θ_s⟩ ds`,
/// with `Θ_0` uniform on the sphere ∩ cone and `J_0` stationary.
pub fn estimate_lambda_angular(
    sys: &LinearSwitchedSystem,
    horizon: f64,
    replicates: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<GrowthRateEstimate> {
    validate(horizon, replicates, opts)?;
    let burn_in = opts.burn_in * horizon;
    let values = map_replicates(replicates, |r| {
        let mut rng = stream(seed, r as u64);
        let mut theta = random_direction(&mut rng, sys.dim(), sys.cone());
        let i0 = stationary_mode(&mut rng, sys);
        let run = run_angular(sys, &mut theta, i0, horizon, burn_in, opts.step, &mut rng, None)?;
        Ok((run.integral - run.integral_at_burn_in) / (horizon - burn_in))
    });
    let stats = reduce(values)?;
    Ok(GrowthRateEstimate {
        value: stats.mean(),
        stderr: stats.std_err(),
        horizon,
        replicates,
        burn_in_fraction: opts.burn_in,
        estimator: EstimatorKind::AngularAverage,
        step: opts.step,
        seed,
    })
}

/// RK4 for `Ẏ = AY`: one full step is the matrix polynomial
/// `I + hA + (hA)²/2 + (hA)³/6 + (hA)⁴/24`, precomputed per mode.
fn rk4_propagator(a: &SquareMatrix, h: f64) -> SquareMatrix {
    let d = a.dim();
    let ha = a.scaled(h);
    let mut term = SquareMatrix::identity(d);
    let mut sum = SquareMatrix::identity(d);
    for k in 1..=4 {
        term = term.matmul(&ha).scaled(1.0 / k as f64);
        sum = sum.add_scaled(1.0, &term);
    }
    sum
}

fn lognorm_replicate(
    sys: &LinearSwitchedSystem,
    propagators: &[SquareMatrix],
    horizon: f64,
    opts: &EstimatorOptions,
    rng: &mut Stream,
) -> Result<f64> {
    let d = sys.dim();
    let q = sys.rates();
    let h = opts.step;
    let mut y = random_direction(rng, d, sys.cone());
    let mut mode = stationary_mode(rng, sys);
    let mut rk = crate::pdmp::Rk4::new(d);
    let mut buf = vec![0.0; d];
    let mut row = vec![0.0; sys.modes()];

    let n_full = (horizon / h).floor() as u64;
    let mut n: u64 = 0;
    let mut on_grid = true;
    let mut t = 0.0;
    let mut log_sum = 0.0;
    let mut next_renorm = opts.renorm_every;
    let mut next_jump = exponential(rng, q.exit_rate(mode));

    let renormalize = |y: &mut [f64], log_sum: &mut f64| -> Result<()> {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm < OVERFLOW_GUARD) || !(norm > 0.0) {
            return Err(Error::Overflow { factor: norm });
        }
        *log_sum += norm.ln();
        y.iter_mut().for_each(|v| *v /= norm);
        Ok(())
    };

    loop {
        let grid_next = if n < n_full { (n + 1) as f64 * h } else { horizon };
        let jump_first = next_jump < grid_next;
        let target = if jump_first { next_jump } else { grid_next };
        if !jump_first && on_grid && n < n_full {
            propagators[mode].mul_vec_into(&y, &mut buf);
            y.copy_from_slice(&buf);
        } else if target > t {
            let a = &sys.matrices()[mode];
            rk.step_with(|x, out| a.mul_vec_into(x, out), &mut y, target - t);
        }
        t = target;
        if t >= next_renorm {
            renormalize(&mut y, &mut log_sum)?;
            while next_renorm <= t {
                next_renorm += opts.renorm_every;
            }
        }
        if jump_first {
            on_grid = false;
            for (j, r) in row.iter_mut().enumerate() {
                *r = q.rate(mode, j);
            }
            mode = categorical(rng, &row, q.exit_rate(mode));
            next_jump = t + exponential(rng, q.exit_rate(mode));
        } else if n < n_full {
            n += 1;
            on_grid = true;
        } else {
            break;
        }
    }
    renormalize(&mut y, &mut log_sum)?;
    Ok(log_sum / horizon)
}

/// `λ̂₁` = replicate mean of `(1/T) log ‖Y_T‖`, integrating `Ẏ = A^J Y`
/// with renormalization every `opts.renorm_every` time units.
pub fn estimate_lambda_lognorm(
    sys: &LinearSwitchedSystem,
    horizon: f64,
    replicates: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<GrowthRateEstimate> {
    validate(horizon, replicates, opts)?;
    let propagators: Vec<SquareMatrix> = sys
        .matrices()
        .iter()
        .map(|a| rk4_propagator(a, opts.step))
        .collect();
    let values = map_replicates(replicates, |r| {
        let mut rng = stream(seed, r as u64);
        lognorm_replicate(sys, &propagators, horizon, opts, &mut rng)
    });
    let stats = reduce(values)?;
    Ok(GrowthRateEstimate {
        value: stats.mean(),
        stderr: stats.std_err(),
        horizon,
        replicates,
        burn_in_fraction: 0.0,
        estimator: EstimatorKind::LogNorm,
        step: opts.step,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub beta: f64,
    pub estimate: GrowthRateEstimate,
}

/// Angular estimates of `λ₁(β)` for rates `β · base_rates`, same horizon,
/// replicate count and seed at every point.
#[allow(clippy::too_many_arguments)]
pub fn lambda_beta_sweep(
    matrices: &[SquareMatrix],
    base_rates: &RateMatrix,
    cone: super::ConeTag,
    betas: &[f64],
    horizon: f64,
    replicates: usize,
    seed: u64,
    opts: &EstimatorOptions,
) -> Result<Vec<SweepPoint>> {
    betas
        .iter()
        .map(|&beta| {
            let sys = LinearSwitchedSystem::new(matrices.to_vec(), base_rates.scaled(beta)?, cone)?;
            let estimate = estimate_lambda_angular(&sys, horizon, replicates, seed, opts)?;
            Ok(SweepPoint { beta, estimate })
        })
        .collect()
}

/// CSV `beta,lambda_hat,stderr,T,N,seed`.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], mut w: W) -> Result<()> {
    use crate::pdmp::fmt_f64;
    writeln!(w, "beta,lambda_hat,stderr,T,N,seed")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(p.beta),
            fmt_f64(p.estimate.value),
            fmt_f64(p.estimate.stderr),
            fmt_f64(p.estimate.horizon),
            p.estimate.replicates,
            p.estimate.seed
        )?;
    }
    Ok(())
}
