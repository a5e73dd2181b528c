//! Closed-form bounds on the top Lyapunov exponent of a switched linear family.

use super::matrix::{ProbabilityVector, SquareMatrix};
use super::spectral::{is_metzler, symmetric_extremes};
use crate::error::{Error, Result};

fn check_family(matrices: &[SquareMatrix], p: &ProbabilityVector) -> Result<usize> {
    if matrices.len() != p.len() {
        return Err(Error::DimensionMismatch {
            what: "matrix family vs weights",
            expected: matrices.len(),
            found: p.len(),
        });
    }
    let d = matrices
        .first()
        .ok_or_else(|| Error::Domain("empty matrix family".into()))?
        .dim();
    if let Some(m) = matrices.iter().find(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch {
            what: "matrix family",
            expected: d,
            found: m.dim(),
        });
    }
    Ok(d)
}

/// `(Σ p_i λ_min(sym Aⁱ), Σ p_i λ_max(sym Aⁱ))`, which bracket every average
/// growth rate of the linear switching system.
pub fn growth_rate_bounds(matrices: &[SquareMatrix], p: &ProbabilityVector) -> Result<(f64, f64)> {
    check_family(matrices, p)?;
    Ok(matrices
        .iter()
        .zip(p.as_slice())
        .fold((0.0, 0.0), |(lo, hi), (a, &w)| {
            let (mn, mx) = symmetric_extremes(a);
            (lo + w * mn, hi + w * mx)
        }))
}

/// `(1/d) Σ p_i Tr(Aⁱ)`, a lower bound for the top exponent.
pub fn trace_lower_bound(matrices: &[SquareMatrix], p: &ProbabilityVector, d: usize) -> Result<f64> {
    let dim = check_family(matrices, p)?;
    if dim != d {
        return Err(Error::DimensionMismatch {
            what: "trace bound dimension",
            expected: dim,
            found: d,
        });
    }
    let weighted: f64 = matrices
        .iter()
        .zip(p.as_slice())
        .map(|(a, &w)| w * a.trace())
        .sum();
    Ok(weighted / d as f64)
}

/// Which off-diagonal coupling term enters the planar Metzler lower estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffDiagonalTerm {
    /// `√(A₁₂ + A₂₁)`.
    Sum,
    /// `√(A₁₂ · A₂₁)`, the classical Kolotilina form.
    Product,
}

/// Lower estimate on the top exponent of a planar Metzler family:
/// `(1/2) Σ p_i Tr(Aⁱ) + Σ p_i √(coupling(Aⁱ))`.
pub fn mierczynski_bound_2d(
    matrices: &[SquareMatrix],
    p: &ProbabilityVector,
    term: OffDiagonalTerm,
) -> Result<f64> {
    let d = check_family(matrices, p)?;
    if d != 2 {
        return Err(Error::DimensionMismatch {
            what: "planar Metzler bound",
            expected: 2,
            found: d,
        });
    }
    if let Some(a) = matrices.iter().find(|a| !is_metzler(a)) {
        return Err(Error::Precondition(format!("matrix {a} is not Metzler")));
    }
    Ok(matrices
        .iter()
        .zip(p.as_slice())
        .map(|(a, &w)| {
            let coupling = match term {
                OffDiagonalTerm::Sum => a.get(0, 1) + a.get(1, 0),
                OffDiagonalTerm::Product => a.get(0, 1) * a.get(1, 0),
            };
            w * (0.5 * a.trace() + coupling.sqrt())
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::spectral_abscissa;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn half() -> ProbabilityVector {
        ProbabilityVector::uniform(2)
    }

    #[test]
    fn symmetric_single_matrix() {
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (lo, hi) = growth_rate_bounds(&[a], &ProbabilityVector::uniform(1)).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_around_planar_abscissa() {
        let a0 = m(&[&[-4.0, 1.0], &[1.0, 0.0]]);
        let a1 = m(&[&[0.0, 1.0], &[1.0, -4.0]]);
        let (lo, hi) = growth_rate_bounds(&[a0, a1], &half()).unwrap();
        // Both matrices are symmetric with λ = √5 − 2, so the upper bound is
        // attained exactly.
        let l = 5f64.sqrt() - 2.0;
        assert!(lo < l);
        assert!((hi - l).abs() < 1e-12);
    }

    #[test]
    fn trace_bound_values() {
        let a0 = m(&[&[-1.0, 3.0], &[2.0, 1.0]]);
        let a1 = m(&[&[2.0, 2.0], &[7.0, -2.0]]);
        assert_eq!(trace_lower_bound(&[a0, a1], &half(), 2).unwrap(), 0.0);
        let d = SquareMatrix::diagonal(&[2.0, 4.0]).unwrap();
        assert_eq!(trace_lower_bound(&[d], &ProbabilityVector::uniform(1), 2).unwrap(), 3.0);
        let b0 = m(&[&[-4.0, 1.0], &[1.0, 0.0]]);
        let b1 = m(&[&[0.0, 1.0], &[1.0, -4.0]]);
        assert_eq!(trace_lower_bound(&[b0, b1], &half(), 2).unwrap(), -2.0);
        assert!(trace_lower_bound(&[m(&[&[1.0]])], &ProbabilityVector::uniform(1), 2).is_err());
    }

    #[test]
    fn planar_bound_variants() {
        let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = ProbabilityVector::uniform(1);
        let sum = mierczynski_bound_2d(std::slice::from_ref(&a), &p, OffDiagonalTerm::Sum).unwrap();
        let prod = mierczynski_bound_2d(std::slice::from_ref(&a), &p, OffDiagonalTerm::Product).unwrap();
        assert!((sum - 2f64.sqrt()).abs() < 1e-15);
        assert!((prod - 1.0).abs() < 1e-15);
        assert!((prod - spectral_abscissa(&a).unwrap()).abs() < 1e-12);

        let diag = SquareMatrix::diagonal(&[-1.0, 3.0]).unwrap();
        for term in [OffDiagonalTerm::Sum, OffDiagonalTerm::Product] {
            assert_eq!(mierczynski_bound_2d(std::slice::from_ref(&diag), &p, term).unwrap(), 1.0);
        }
        assert!(mierczynski_bound_2d(&[SquareMatrix::zeros(3)], &p, OffDiagonalTerm::Sum).is_err());
    }
}
