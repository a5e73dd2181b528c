use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub time: f64,
    pub from: usize,
    pub to: usize,
    /// Index of the sample recorded at the jump (it carries the new mode).
    pub sample: usize,
}

/// Sampled path of `Z = (X, I)`. Modes are right-continuous: the sample at
/// a jump time carries the post-jump mode, and `modes[k]` is active on
/// `[times[k], times[k+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dim: usize,
    pub times: Vec<f64>,
    /// Row-major, `dim` entries per sample.
    pub states: Vec<f64>,
    pub modes: Vec<usize>,
    pub jumps: Vec<Jump>,
    pub seed: u64,
    /// Set when the max-jumps cap stopped the run before the horizon.
    pub truncated: bool,
}

impl Trajectory {
    pub(crate) fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            times: Vec::new(),
            states: Vec::new(),
            modes: Vec::new(),
            jumps: Vec::new(),
            seed,
            truncated: false,
        }
    }

    pub(crate) fn record(&mut self, t: f64, x: &[f64], mode: usize) {
        if self.times.last() == Some(&t) {
            let k = self.times.len() - 1;
            self.states[k * self.dim..].copy_from_slice(x);
            self.modes[k] = mode;
            return;
        }
        self.times.push(t);
        self.states.extend_from_slice(x);
        self.modes.push(mode);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64], usize)> + '_ {
        self.times
            .iter()
            .zip(self.states.chunks(self.dim))
            .zip(&self.modes)
            .map(|((&t, x), &m)| (t, x, m))
    }

    /// CSV with header `t,mode,x1,...,xd`, floats at 17 significant digits.
    /// Each jump yields two rows at the same time: the pre-jump mode first,
    /// then the post-jump mode.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "t,mode")?;
        for i in 1..=self.dim {
            write!(w, ",x{i}")?;
        }
        writeln!(w)?;
        let mut jumps = self.jumps.iter().peekable();
        for (k, (t, x, mode)) in self.iter().enumerate() {
            while let Some(j) = jumps.next_if(|j| j.sample == k) {
                write_row(&mut w, t, j.from, x)?;
            }
            write_row(&mut w, t, mode, x)?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(w: &mut W, t: f64, mode: usize, x: &[f64]) -> Result<()> {
    write!(w, "{},{}", fmt_f64(t), mode)?;
    for v in x {
        write!(w, ",{}", fmt_f64(*v))?;
    }
    writeln!(w)?;
    Ok(())
}
