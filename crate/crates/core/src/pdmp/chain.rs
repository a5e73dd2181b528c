use serde::{Deserialize, Serialize};

use super::rng::{categorical, exponential, stream};
use crate::error::{Error, Result};
use crate::matrixcore::RateMatrix;

/// Path of the autonomous mode chain on `[0, horizon]`: `modes[k]` is
/// occupied on `[times[k], times[k+1])`, the last one until `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePath {
    pub times: Vec<f64>,
    pub modes: Vec<usize>,
    pub horizon: f64,
}

impl ModePath {
    /// Fraction of `[0, horizon]` spent in each mode.
    pub fn occupation(&self, modes: usize) -> Vec<f64> {
        let mut occ = vec![0.0; modes];
        for (k, &m) in self.modes.iter().enumerate() {
            let end = self.times.get(k + 1).copied().unwrap_or(self.horizon);
            occ[m] += end - self.times[k];
        }
        occ.iter_mut().for_each(|o| *o /= self.horizon);
        occ
    }

    /// Completed holding times per mode (the final, censored one excluded).
    pub fn holding_times(&self, modes: usize) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new(); modes];
        for k in 0..self.modes.len().saturating_sub(1) {
            out[self.modes[k]].push(self.times[k + 1] - self.times[k]);
        }
        out
    }

    /// Mode occupied at time `t`.
    pub fn mode_at(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s <= t);
        self.modes[k.saturating_sub(1)]
    }
}

/// Simulates the jump chain with rates `q` from mode `i0` up to `horizon`.
pub fn simulate_mode_chain(q: &RateMatrix, i0: usize, horizon: f64, seed: u64) -> Result<ModePath> {
    let n = q.modes();
    if i0 >= n {
        return Err(Error::Domain(format!("initial mode {i0} out of range")));
    }
    q.ensure_irreducible()?;
    let mut rng = stream(seed, 0);
    let mut times = vec![0.0];
    let mut modes = vec![i0];
    let mut t = 0.0;
    let mut mode = i0;
    let mut row = vec![0.0; n];
    loop {
        let exit = q.exit_rate(mode);
        if exit <= 0.0 {
            if n == 1 {
                break;
            }
            return Err(Error::AbsorbingMode { mode });
        }
        t += exponential(&mut rng, exit);
        if t >= horizon {
            break;
        }
        for (j, r) in row.iter_mut().enumerate() {
            *r = q.rate(mode, j);
        }
        mode = categorical(&mut rng, &row, exit);
        times.push(t);
        modes.push(mode);
    }
    Ok(ModePath {
        times,
        modes,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RunningStats;

    #[test]
    fn symmetric_pair_spends_half_the_time_in_each_mode() {
        let q = RateMatrix::symmetric_pair(2.0).unwrap();
        let horizon = 1e4;
        let path = simulate_mode_chain(&q, 0, horizon, 5).unwrap();
        let occ = path.occupation(2);
        // Alternating renewal, Exp(2) holds (mean m = 1/2, variance v = 1/4):
        // Var(time in 0) ≈ T (m²v + m²v) / (2m)³ = T/8.
        let sigma = (0.125 / horizon).sqrt();
        assert!((occ[0] - 0.5).abs() < 3.0 * sigma, "{occ:?}");
    }

    #[test]
    fn holding_times_are_exponential_means() {
        let q = RateMatrix::from_rows(vec![
            vec![0.0, 1.0, 2.0],
            vec![0.5, 0.0, 0.5],
            vec![3.0, 1.0, 0.0],
        ])
        .unwrap();
        let path = simulate_mode_chain(&q, 0, 3e4, 9).unwrap();
        for (i, holds) in path.holding_times(3).iter().enumerate() {
            assert!(holds.len() > 10_000);
            let s: RunningStats = holds.iter().copied().collect();
            let mean = 1.0 / q.exit_rate(i);
            // Exponential: sd = mean.
            assert!((s.mean() - mean).abs() < 3.0 * mean / (holds.len() as f64).sqrt());
        }
    }

    #[test]
    fn asymmetric_rates_give_weighted_occupation() {
        let (beta, tt) = (5.0, 0.3);
        let q = RateMatrix::from_rows(vec![vec![0.0, beta * tt], vec![beta * (1.0 - tt), 0.0]]).unwrap();
        let path = simulate_mode_chain(&q, 0, 2e4, 21).unwrap();
        let occ = path.occupation(2);
        assert!((occ[0] - (1.0 - tt)).abs() < 0.01, "{occ:?}");
    }

    #[test]
    fn absorbing_mode_is_rejected() {
        let q = RateMatrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(simulate_mode_chain(&q, 0, 10.0, 1).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let q = RateMatrix::symmetric_pair(3.0).unwrap();
        assert_eq!(
            simulate_mode_chain(&q, 1, 100.0, 77).unwrap(),
            simulate_mode_chain(&q, 1, 100.0, 77).unwrap()
        );
    }
}
