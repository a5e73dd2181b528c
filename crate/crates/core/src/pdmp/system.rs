use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrixcore::{RateMatrix, SquareMatrix};
use crate::vectorfields::SwitchedFieldFamily;

/// State-dependent jump intensities `x ↦ (a_ij(x))`.
pub trait RateFunction: Send + Sync {
    fn modes(&self) -> usize;

    /// Writes `a_{mode, j}(x)` for every `j` into `out`.
    fn row_into(&self, x: &[f64], mode: usize, out: &mut [f64]);

    fn matrix_at(&self, x: &[f64]) -> Result<RateMatrix> {
        let n = self.modes();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            self.row_into(x, i, &mut data[i * n..(i + 1) * n]);
        }
        RateMatrix::new(SquareMatrix::from_row_major(n, data)?)
    }
}

/// Rate function from a closure returning the full rate matrix.
pub struct FnRates<F> {
    modes: usize,
    f: F,
}

impl<F> FnRates<F>
where
    F: Fn(&[f64], usize, &mut [f64]) + Send + Sync,
{
    pub fn new(modes: usize, f: F) -> Self {
        Self { modes, f }
    }
}

impl<F> RateFunction for FnRates<F>
where
    F: Fn(&[f64], usize, &mut [f64]) + Send + Sync,
{
    fn modes(&self) -> usize {
        self.modes
    }

    fn row_into(&self, x: &[f64], mode: usize, out: &mut [f64]) {
        (self.f)(x, mode, out)
    }
}

#[derive(Clone)]
pub enum Rates {
    Constant(RateMatrix),
    StateDependent(Arc<dyn RateFunction>),
}

impl fmt::Debug for Rates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rates::Constant(q) => write!(f, "Constant({q:?})"),
            Rates::StateDependent(r) => write!(f, "StateDependent({} modes)", r.modes()),
        }
    }
}

impl Rates {
    pub fn modes(&self) -> usize {
        match self {
            Rates::Constant(q) => q.modes(),
            Rates::StateDependent(r) => r.modes(),
        }
    }

    pub fn at(&self, x: &[f64]) -> Result<RateMatrix> {
        match self {
            Rates::Constant(q) => Ok(q.clone()),
            Rates::StateDependent(r) => r.matrix_at(x),
        }
    }
}

/// A switched field family together with its jump mechanism.
#[derive(Clone)]
pub struct SwitchedSystem {
    family: SwitchedFieldFamily,
    rates: Rates,
    majorant: f64,
}

impl SwitchedSystem {
    /// Safety factor applied to the grid maximum of the total exit rate.
    pub const MAJORANT_SAFETY: f64 = 1.1;
    /// Majorant grid budget: `32^d` points, capped at `32^3`.
    const GRID_BUDGET: usize = 32 * 32 * 32;

    pub fn new(family: SwitchedFieldFamily, rates: Rates) -> Result<Self> {
        if rates.modes() != family.modes() {
            return Err(Error::DimensionMismatch {
                what: "rate modes vs fields",
                expected: family.modes(),
                found: rates.modes(),
            });
        }
        let majorant = match &rates {
            Rates::Constant(q) => {
                q.ensure_irreducible()?;
                q.max_exit_rate()
            }
            Rates::StateDependent(r) => grid_majorant(r.as_ref(), &family)? * Self::MAJORANT_SAFETY,
        };
        Ok(Self {
            family,
            rates,
            majorant,
        })
    }

    pub fn constant(family: SwitchedFieldFamily, q: RateMatrix) -> Result<Self> {
        Self::new(family, Rates::Constant(q))
    }

    pub fn family(&self) -> &SwitchedFieldFamily {
        &self.family
    }

    pub fn rates(&self) -> &Rates {
        &self.rates
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn modes(&self) -> usize {
        self.family.modes()
    }

    /// Thinning bound for state-dependent rates; the maximal exit rate for
    /// constant ones.
    pub fn majorant(&self) -> f64 {
        self.majorant
    }

    /// Same fields, constant rates multiplied by `beta`.
    pub fn with_rate_multiplier(&self, beta: f64) -> Result<Self> {
        match &self.rates {
            Rates::Constant(q) => Self::constant(self.family.clone(), q.scaled(beta)?),
            Rates::StateDependent(_) => Err(Error::Config(
                "rate multiplier only applies to constant rates".into(),
            )),
        }
    }
}

fn grid_majorant(rates: &dyn RateFunction, family: &SwitchedFieldFamily) -> Result<f64> {
    let dom = family.domain();
    if !dom.is_bounded() {
        return Err(Error::Domain(
            "state-dependent rates need a bounded domain for the thinning majorant".into(),
        ));
    }
    let d = dom.dim();
    let mut per_axis = 32usize;
    while per_axis > 2 && per_axis.pow(d as u32) > SwitchedSystem::GRID_BUDGET {
        per_axis -= 1;
    }
    let n = rates.modes();
    let mut x = vec![0.0; d];
    let mut row = vec![0.0; n];
    let mut idx = vec![0usize; d];
    let mut best = 0.0_f64;
    loop {
        for k in 0..d {
            let frac = idx[k] as f64 / (per_axis - 1) as f64;
            x[k] = dom.lower[k] + frac * (dom.upper[k] - dom.lower[k]);
        }
        for i in 0..n {
            rates.row_into(&x, i, &mut row);
            if row.iter().any(|r| !(*r >= 0.0)) {
                return Err(Error::InvalidRates(format!(
                    "negative or NaN rate out of mode {i} at {x:?}"
                )));
            }
            best = best.max(row.iter().sum());
        }
        // Odometer increment over the grid.
        let mut k = 0;
        loop {
            if k == d {
                return Ok(best);
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
