use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdmp::Trajectory;
use crate::stats::linear_fit;

/// Exponents tried when looking for a bounded tail moment.
pub const TAIL_THETAS: [f64; 4] = [0.05, 0.1, 0.2, 0.5];

/// Smallest norm treated as nonzero by [`extinction_rate`]. Below it the
/// logarithm is dominated by subnormal rounding and eventually by exact
/// underflow to zero.
pub const NORM_FLOOR: f64 = 1e-300;

/// Smallest distance treated as nonzero by [`convergence_rate`]; states
/// within round-off of the target carry no rate information.
pub const DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMoment {
    pub theta: f64,
    /// `(1/T) ∫ ‖X_t‖^{−θ} dt`, `+∞` when the path touches 0.
    pub value: f64,
    pub infinite: bool,
}

/// Euclidean norm, scaled so subnormal states do not square to zero.
pub(crate) fn norm(x: &[f64]) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * x.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
}

/// Trapezoid time average of `‖X_t‖^{−θ}` over `[0, t_end]`, restricted to
/// the samples with `t ≤ t_end`.
pub fn tail_moment_until(traj: &Trajectory, theta: f64, t_end: f64) -> Result<TailMoment> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("exponent {theta} must be positive")));
    }
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let last = traj.times.partition_point(|&t| t <= t_end).max(1);
    let f = |k: usize| norm(traj.state(k)).powf(-theta);
    if (0..last).any(|k| norm(traj.state(k)) == 0.0) {
        return Ok(TailMoment { theta, value: f64::INFINITY, infinite: true });
    }
    if last == 1 {
        return Ok(TailMoment { theta, value: f(0), infinite: false });
    }
    let mut integral = 0.0;
    for k in 0..last - 1 {
        integral += 0.5 * (f(k) + f(k + 1)) * (traj.times[k + 1] - traj.times[k]);
    }
    let value = integral / (traj.times[last - 1] - traj.times[0]);
    Ok(TailMoment { theta, value, infinite: !value.is_finite() })
}

pub fn tail_moment(traj: &Trajectory, theta: f64) -> Result<TailMoment> {
    tail_moment_until(traj, theta, f64::INFINITY)
}

/// [`tail_moment`] at every exponent of [`TAIL_THETAS`].
pub fn tail_moment_sweep(traj: &Trajectory) -> Result<Vec<TailMoment>> {
    TAIL_THETAS.iter().map(|&th| tail_moment(traj, th)).collect()
}

/// Least-squares fit of `log ‖·‖` against time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    /// Time at which the norm first fell below the floor, if it did.
    pub floor_hit: Option<f64>,
}

/// Fits `log ‖X_t − target‖` over the trailing `window_fraction` of the
/// stretch before the norm first drops below `floor`.
pub fn log_distance_fit(
    traj: &Trajectory,
    target: Option<&[f64]>,
    window_fraction: f64,
    floor: f64,
) -> Result<ExtinctionFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::Domain(format!("window fraction {window_fraction} must be in (0, 1]")));
    }
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let dist = |k: usize| -> f64 {
        match target {
            Some(c) => {
                let diff: Vec<f64> = traj.state(k).iter().zip(c).map(|(a, b)| a - b).collect();
                norm(&diff)
            }
            None => norm(traj.state(k)),
        }
    };
    let cut = (0..traj.len()).find(|&k| !(dist(k) >= floor));
    let end = cut.unwrap_or(traj.len());
    let floor_hit = cut.map(|k| traj.times[k]);
    if end == 0 {
        return Err(Error::ZeroState { time: traj.times[0] });
    }
    let t_first = traj.times[0];
    let t_end = traj.times[end - 1];
    let t0 = t_end - window_fraction * (t_end - t_first);
    let start = traj.times[..end].partition_point(|&t| t < t0);
    if end - start < 3 {
        return Err(Error::ZeroState {
            time: floor_hit.unwrap_or(t_end),
        });
    }
    let ts = &traj.times[start..end];
    let ys: Vec<f64> = (start..end).map(|k| dist(k).ln()).collect();
    let (slope, intercept, r2) = linear_fit(ts, &ys);
    Ok(ExtinctionFit {
        slope,
        intercept,
        r2: r2.clamp(0.0, 1.0),
        window: (ts[0], t_end),
        floor_hit,
    })
}

/// Slope of `log ‖X_t‖` over the trailing window.
///
/// A path that underflows keeps only the stretch above [`NORM_FLOOR`]; the
/// window then ends there and `floor_hit` records when. A path that starts
/// at the origin is a [`Error::ZeroState`]: shorten the horizon or raise
/// the initial state.
pub fn extinction_rate(traj: &Trajectory, window_fraction: f64) -> Result<ExtinctionFit> {
    log_distance_fit(traj, None, window_fraction, NORM_FLOOR)
}

/// Slope of `log ‖X_t − target‖`, cut at [`DISTANCE_FLOOR`].
pub fn convergence_rate(traj: &Trajectory, target: &[f64], window_fraction: f64) -> Result<ExtinctionFit> {
    if target.len() != traj.dim {
        return Err(Error::DimensionMismatch {
            what: "target",
            expected: traj.dim,
            found: target.len(),
        });
    }
    log_distance_fit(traj, Some(target), window_fraction, DISTANCE_FLOOR)
}
