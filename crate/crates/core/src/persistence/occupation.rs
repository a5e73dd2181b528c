use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdmp::{fmt_f64, Trajectory};
use crate::vectorfields::BoxDomain;

/// Grid resolution used when none is given: 64 cells per axis in 2-d,
/// 32 in 3-d, 16 beyond.
pub fn default_cells(dim: usize) -> usize {
    match dim {
        0..=2 => 64,
        3 => 32,
        _ => 16,
    }
}

/// Time spent by `(X_t, I_t)` in each (cell, mode) of a uniform box grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationHistogram {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells_per_axis: usize,
    pub modes: usize,
    /// Flat cell index (first axis fastest) times `modes`, plus mode.
    pub weights: Vec<f64>,
    pub total_time: f64,
}

impl OccupationHistogram {
    pub fn new(domain: &BoxDomain, cells_per_axis: usize, modes: usize) -> Result<Self> {
        if !domain.is_bounded() {
            return Err(Error::Precondition("occupation grid needs a bounded domain".into()));
        }
        if cells_per_axis == 0 || modes == 0 {
            return Err(Error::Config("grid needs at least one cell and one mode".into()));
        }
        let n = cells_per_axis.pow(domain.dim() as u32) * modes;
        Ok(Self {
            lower: domain.lower.clone(),
            upper: domain.upper.clone(),
            cells_per_axis,
            modes,
            weights: vec![0.0; n],
            total_time: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn cell_count(&self) -> usize {
        self.weights.len() / self.modes
    }

    /// Per-axis indices of the cell holding `x`; points on or past the
    /// boundary go to the nearest cell.
    pub fn cell_of(&self, x: &[f64]) -> Vec<usize> {
        let n = self.cells_per_axis;
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| {
                let u = ((v - lo) / (hi - lo) * n as f64).floor();
                if u.is_nan() || u < 0.0 {
                    0
                } else {
                    (u as usize).min(n - 1)
                }
            })
            .collect()
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.cells_per_axis + i)
    }

    fn unflat(&self, mut k: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|_| {
                let i = k % self.cells_per_axis;
                k /= self.cells_per_axis;
                i
            })
            .collect()
    }

    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        let n = self.cells_per_axis as f64;
        idx.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&i, (&lo, &hi))| lo + (i as f64 + 0.5) * (hi - lo) / n)
            .collect()
    }

    pub fn add(&mut self, x: &[f64], mode: usize, dt: f64) {
        let k = self.flat(&self.cell_of(x));
        self.weights[k * self.modes + mode] += dt;
        self.total_time += dt;
    }

    /// Associative merge of two histograms on the same grid.
    pub fn merge(&mut self, other: &OccupationHistogram) -> Result<()> {
        if self.lower != other.lower
            || self.upper != other.upper
            || self.cells_per_axis != other.cells_per_axis
            || self.modes != other.modes
        {
            return Err(Error::Precondition("histograms live on different grids".into()));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        self.total_time += other.total_time;
        Ok(())
    }

    /// Weights divided by the total time.
    pub fn probabilities(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.total_time).collect()
    }

    /// Fraction of time in each mode.
    pub fn mode_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.modes];
        for (k, w) in self.weights.iter().enumerate() {
            m[k % self.modes] += w;
        }
        m.iter().map(|w| w / self.total_time).collect()
    }

    /// Fraction of time in the cell holding `x`, all modes.
    pub fn cell_mass(&self, x: &[f64]) -> f64 {
        let k = self.flat(&self.cell_of(x));
        let w: f64 = self.weights[k * self.modes..(k + 1) * self.modes].iter().sum();
        w / self.total_time
    }

    /// CSV `cell_1,…,cell_d,mode,mass` with mass normalized by total time.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let cols: Vec<String> = (1..=self.dim()).map(|i| format!("cell_{i}")).collect();
        writeln!(w, "{},mode,mass", cols.join(","))?;
        for (k, weight) in self.weights.iter().enumerate() {
            let idx = self.unflat(k / self.modes);
            let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(w, "{},{},{}", idx.join(","), k % self.modes, fmt_f64(weight / self.total_time))?;
        }
        Ok(())
    }
}

/// Occupation of `traj` over `[t_start, T]`: each sampling interval gives
/// half its length to each endpoint's cell, under the mode active on it.
pub fn occupation_measure_after(
    traj: &Trajectory,
    domain: &BoxDomain,
    cells_per_axis: usize,
    modes: usize,
    t_start: f64,
) -> Result<OccupationHistogram> {
    if traj.is_empty() {
        return Err(Error::Precondition("empty trajectory".into()));
    }
    let mut hist = OccupationHistogram::new(domain, cells_per_axis, modes)?;
    if let Some(&m) = traj.modes.iter().max() {
        if m >= modes {
            return Err(Error::Domain(format!("trajectory mode {m} out of range")));
        }
    }
    for k in 0..traj.len() - 1 {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        if t1 <= t_start {
            continue;
        }
        let dt = t1 - t0.max(t_start);
        let mode = traj.modes[k];
        hist.add(traj.state(k), mode, 0.5 * dt);
        hist.add(traj.state(k + 1), mode, 0.5 * dt);
    }
    if hist.total_time == 0.0 {
        // A single sample or a window past the end: point mass at the last state.
        hist.add(traj.final_state(), *traj.modes.last().expect("nonempty"), 1.0);
    }
    Ok(hist)
}

pub fn occupation_measure(
    traj: &Trajectory,
    domain: &BoxDomain,
    cells_per_axis: usize,
    modes: usize,
) -> Result<OccupationHistogram> {
    occupation_measure_after(traj, domain, cells_per_axis, modes, f64::NEG_INFINITY)
}

/// Normalized mass of the cells whose centers lie in the open Euclidean
/// ball `B(0, r)`, all modes.
pub fn ball_mass(hist: &OccupationHistogram, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let mut mass = 0.0;
    for k in 0..hist.cell_count() {
        let c = hist.center(&hist.unflat(k));
        let norm = super::rates::norm(&c);
        if norm < r {
            mass += hist.weights[k * hist.modes..(k + 1) * hist.modes].iter().sum::<f64>();
        }
    }
    Ok((mass / hist.total_time).clamp(0.0, 1.0))
}
