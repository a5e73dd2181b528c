//! Metrics on the positive cone and the contraction of positive matrices.

use super::matrix::SquareMatrix;
use crate::error::{Error, Result};

fn check_positive(x: &[f64], what: &str) -> Result<()> {
    match x.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        Some(i) => Err(Error::Domain(format!(
            "{what} entry {i} = {} is not strictly positive",
            x[i]
        ))),
        None => Ok(()),
    }
}

/// Hilbert projective distance `log(max_i x_i/y_i / min_i x_i/y_i)` between
/// two strictly positive vectors.
pub fn hilbert_metric(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "hilbert_metric",
            expected: x.len(),
            found: y.len(),
        });
    }
    check_positive(x, "x")?;
    check_positive(y, "y")?;
    let (lo, hi) = x
        .iter()
        .zip(y)
        .map(|(a, b)| a.ln() - b.ln())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        });
    Ok((hi - lo).max(0.0))
}

/// Birkhoff contraction coefficient `τ = (1 − √φ)/(1 + √φ)` of a strictly
/// positive matrix, with `φ = min T_ik T_jl / (T_jk T_il)` over all index
/// quadruples.
pub fn birkhoff_contraction(t: &SquareMatrix) -> Result<f64> {
    check_positive(t.as_slice(), "matrix")?;
    let d = t.dim();
    let mut phi = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let r = (t.get(i, k) * t.get(j, l)) / (t.get(j, k) * t.get(i, l));
                    phi = phi.min(r);
                }
            }
        }
    }
    let s = phi.min(1.0).sqrt();
    Ok((1.0 - s) / (1.0 + s))
}

/// Birkhoff part metric: `max |log x_i − log y_i|` over the common support,
/// `+∞` when the supports differ.
pub fn part_metric(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0_f64;
    for (&a, &b) in x.iter().zip(y) {
        match (a > 0.0, b > 0.0) {
            (true, true) => worst = worst.max((a.ln() - b.ln()).abs()),
            (false, false) => {}
            _ => return f64::INFINITY,
        }
    }
    worst
}
