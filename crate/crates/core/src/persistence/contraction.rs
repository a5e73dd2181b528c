use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::part_metric;
use crate::parallel::map_replicates;
use crate::pdmp::{fmt_f64, synchronous_pair_replicate, IntegratorConfig, SwitchedSystem, Trajectory};
use crate::stats::{linear_fit, RunningStats};

/// Slack allowed on pathwise nonexpansivity of the part metric.
pub const NONEXPANSIVE_SLACK: f64 = 1e-9;

/// Mean distances below this are round-off and are left out of the slope.
pub const CURVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Replicates dropped because a coordinate left the part.
    pub excluded: usize,
    pub replicates: usize,
    pub initial_distance: f64,
    /// Largest `p(X_{t_{k+1}}, Y_{t_{k+1}}) − p(X_{t_k}, Y_{t_k})` over
    /// all kept replicates and recorded samples.
    pub max_increase: f64,
    /// Replicates whose distance ever rose by more than [`NONEXPANSIVE_SLACK`].
    pub nonexpansive_violations: usize,
    /// Slope of `log mean_p` over the trailing half of the stretch above
    /// [`CURVE_FLOOR`]; `None` when fewer than three points qualify.
    pub log_slope: Option<f64>,
}

impl DecayCurve {
    /// CSV `t,mean_p,stderr,excluded`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,mean_p,stderr,excluded")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(self.times[k]),
                fmt_f64(self.mean[k]),
                fmt_f64(self.stderr[k]),
                self.excluded
            )?;
        }
        Ok(())
    }
}

struct PairSummary {
    on_grid: Vec<f64>,
    max_increase: f64,
}

fn summarize(x: &Trajectory, y: &Trajectory, grid: &[f64]) -> Option<PairSummary> {
    let p: Vec<f64> = (0..x.len()).map(|k| part_metric(x.state(k), y.state(k))).collect();
    if p.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let max_increase = p
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let on_grid = grid
        .iter()
        .map(|&g| {
            let k = x.times.partition_point(|&t| t <= g + 1e-9).max(1) - 1;
            p[k]
        })
        .collect();
    Some(PairSummary { on_grid, max_increase })
}

/// Mean part metric `p(X_t, Y_t)` of synchronously coupled copies on
/// `points + 1` equally spaced times in `[0, horizon]`.
#[allow(clippy::too_many_arguments)]
pub fn part_metric_contraction(
    system: &SwitchedSystem,
    x0: &[f64],
    y0: &[f64],
    i0: usize,
    horizon: f64,
    replicates: usize,
    seed: u64,
    points: usize,
    config: &IntegratorConfig,
) -> Result<DecayCurve> {
    if !system.family().domain().is_bounded() {
        return Err(Error::Precondition("part metric needs an epidemic system".into()));
    }
    let initial_distance = part_metric(x0, y0);
    if !initial_distance.is_finite() {
        return Err(Error::Precondition("initial states lie in different parts".into()));
    }
    if replicates == 0 || points == 0 {
        return Err(Error::Config("need at least one replicate and one grid point".into()));
    }
    let grid: Vec<f64> = (0..=points).map(|k| horizon * k as f64 / points as f64).collect();
    let results = map_replicates(replicates, |r| {
        synchronous_pair_replicate(system, x0, y0, i0, horizon, seed, r as u64, config)
            .map(|(x, y)| summarize(&x, &y, &grid))
    });

    let mut stats = vec![RunningStats::new(); grid.len()];
    let mut excluded = 0;
    let mut max_increase = f64::NEG_INFINITY;
    let mut violations = 0;
    for res in results {
        match res? {
            None => excluded += 1,
            Some(s) => {
                for (acc, v) in stats.iter_mut().zip(&s.on_grid) {
                    acc.push(*v);
                }
                if s.max_increase > NONEXPANSIVE_SLACK {
                    violations += 1;
                }
                max_increase = max_increase.max(s.max_increase);
            }
        }
    }
    let kept = replicates - excluded;
    let mean: Vec<f64> = stats.iter().map(|s| if kept > 0 { s.mean() } else { f64::NAN }).collect();
    let stderr: Vec<f64> = stats
        .iter()
        .map(|s| if kept > 1 { s.std_err() } else { 0.0 })
        .collect();

    let end = mean.iter().position(|m| !(*m >= CURVE_FLOOR)).unwrap_or(mean.len());
    let log_slope = if end >= 3 {
        let t_end = grid[end - 1];
        let start = grid[..end].partition_point(|&t| t < 0.5 * t_end);
        if end - start >= 3 {
            let ys: Vec<f64> = mean[start..end].iter().map(|m| m.ln()).collect();
            Some(linear_fit(&grid[start..end], &ys).0)
        } else {
            None
        }
    } else {
        None
    };

    Ok(DecayCurve {
        times: grid,
        mean,
        stderr,
        excluded,
        replicates,
        initial_distance,
        max_increase,
        nonexpansive_violations: violations,
        log_slope,
    })
}
