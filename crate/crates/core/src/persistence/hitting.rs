use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::map_replicates;
use crate::pdmp::{simulate_until, IntegratorConfig, SwitchedSystem};

/// Bases of the geometric moments `𝔼 b^τ` reported with a sample.
pub const GEOMETRIC_BASES: [f64; 3] = [1.01, 1.05, 1.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeSample {
    pub epsilon: f64,
    pub horizon: f64,
    /// First time with `‖X_t‖ ≥ ε`, or the horizon when censored.
    pub times: Vec<f64>,
    pub censored: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricMoment {
    pub base: f64,
    /// Sample mean of `b^τ` with censored times set to the horizon, hence a
    /// lower bound whenever `censored > 0`.
    pub mean: f64,
    pub censored: usize,
}

impl HittingTimeSample {
    pub fn censored_count(&self) -> usize {
        self.censored.iter().filter(|&&c| c).count()
    }

    pub fn mean_time(&self) -> f64 {
        self.times.iter().sum::<f64>() / self.times.len() as f64
    }

    pub fn geometric_moment(&self, base: f64) -> GeometricMoment {
        let mean = self.times.iter().map(|t| base.powf(*t)).sum::<f64>() / self.times.len() as f64;
        GeometricMoment {
            base,
            mean,
            censored: self.censored_count(),
        }
    }

    pub fn geometric_moments(&self) -> Vec<GeometricMoment> {
        GEOMETRIC_BASES.iter().map(|&b| self.geometric_moment(b)).collect()
    }
}

/// First passage of `‖X_t‖` above `epsilon` for `replicates` runs on
/// streams `0..replicates` of `seed`; run `r` starts from
/// `x0_list[r % len]`. Passage is detected at step ends.
#[allow(clippy::too_many_arguments)]
pub fn hitting_times(
    system: &SwitchedSystem,
    x0_list: &[Vec<f64>],
    i0: usize,
    epsilon: f64,
    horizon: f64,
    replicates: usize,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<HittingTimeSample> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("threshold {epsilon} must be positive")));
    }
    if x0_list.is_empty() || replicates == 0 {
        return Err(Error::Config("need at least one initial state and one replicate".into()));
    }
    let sq = epsilon * epsilon;
    let stop = move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() >= sq;
    // Only the hit time is needed, so keep the recorded path sparse.
    let cfg = IntegratorConfig {
        sample_stride: usize::MAX,
        ..*config
    };
    let results = map_replicates(replicates, |r| {
        let x0 = &x0_list[r % x0_list.len()];
        simulate_until(system, x0, i0, horizon, seed, r as u64, &cfg, &stop).map(|(_, hit)| hit)
    });
    let mut times = Vec::with_capacity(replicates);
    let mut censored = Vec::with_capacity(replicates);
    for hit in results {
        match hit? {
            Some(t) => {
                times.push(t);
                censored.push(false);
            }
            None => {
                times.push(horizon);
                censored.push(true);
            }
        }
    }
    Ok(HittingTimeSample {
        epsilon,
        horizon,
        times,
        censored,
    })
}
