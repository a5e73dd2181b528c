use serde::{Deserialize, Serialize};

use super::system::LinearSwitchedSystem;
use crate::error::{Error, Result};
use crate::matrixcore::{
    expm, growth_rate_bounds, is_irreducible, is_metzler, mierczynski_bound_2d, perron_vector,
    spectral_abscissa, spectral_radius, trace_lower_bound, OffDiagonalTerm, SquareMatrix,
};

/// Fast-switching limit: `λ(A^p)` and the Perron direction of `A^p`
/// (requires `A^p` Metzler and irreducible).
pub fn averaged_limit(sys: &LinearSwitchedSystem) -> Result<(f64, Vec<f64>)> {
    let ap = sys.averaged_matrix();
    if !is_metzler(&ap) || !is_irreducible(&ap) {
        return Err(Error::Precondition(format!(
            "averaged matrix {ap} is not Metzler irreducible; no closed-form fast-switching \
             limit, estimate λ₁ at large rates instead"
        )));
    }
    perron_vector(&ap)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    pub symmetric_lower: f64,
    pub symmetric_upper: f64,
    pub trace_lower: f64,
    /// Planar Metzler families only: the `√(A₁₂ + A₂₁)` variant.
    pub mierczynski_sum: Option<f64>,
    /// Planar Metzler families only: the `√(A₁₂ A₂₁)` variant.
    pub mierczynski_product: Option<f64>,
}

/// Symmetric-part and trace bounds, weighted by the stationary law.
pub fn analytic_bounds(sys: &LinearSwitchedSystem) -> AnalyticBounds {
    let p = sys.stationary();
    let mats = sys.matrices();
    let (symmetric_lower, symmetric_upper) =
        growth_rate_bounds(mats, p).expect("validated family");
    let trace_lower = trace_lower_bound(mats, p, sys.dim()).expect("validated family");
    let planar = sys.dim() == 2 && mats.iter().all(is_metzler);
    let (mierczynski_sum, mierczynski_product) = if planar {
        (
            mierczynski_bound_2d(mats, p, OffDiagonalTerm::Sum).ok(),
            mierczynski_bound_2d(mats, p, OffDiagonalTerm::Product).ok(),
        )
    } else {
        (None, None)
    };
    AnalyticBounds {
        symmetric_lower,
        symmetric_upper,
        trace_lower,
        mierczynski_sum,
        mierczynski_product,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCheck {
    pub all_hurwitz: bool,
    /// Convex weights of the combination with the largest abscissa.
    pub worst_weights: Vec<f64>,
    pub worst_lambda: f64,
}

impl HullCheck {
    /// Weight on the second matrix of a pair (`t` in `(1−t)A⁰ + tA¹`).
    pub fn worst_t(&self) -> f64 {
        self.worst_weights.get(1).copied().unwrap_or(0.0)
    }
}

/// Scans `λ(Σ wᵢ Aⁱ)` over the simplex grid with `grid` points per edge.
pub fn hurwitz_hull_check(matrices: &[SquareMatrix], grid: usize) -> Result<HullCheck> {
    if grid < 2 {
        return Err(Error::Config("hull grid needs at least 2 points".into()));
    }
    let k = matrices.len();
    if k == 0 {
        return Err(Error::Domain("empty matrix family".into()));
    }
    let parts = grid - 1;
    let mut best = HullCheck {
        all_hurwitz: true,
        worst_weights: Vec::new(),
        worst_lambda: f64::NEG_INFINITY,
    };
    let mut counts = vec![0usize; k];
    let mut visit = |counts: &[usize]| -> Result<()> {
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / parts as f64).collect();
        let lambda = spectral_abscissa(&SquareMatrix::combination(matrices, &w)?)?;
        if lambda >= 0.0 {
            best.all_hurwitz = false;
        }
        if lambda > best.worst_lambda {
            best.worst_lambda = lambda;
            best.worst_weights = w;
        }
        Ok(())
    };
    compositions(&mut counts, 0, parts, &mut visit)?;
    Ok(best)
}

/// Enumerates every way to write `remaining` as an ordered sum over
/// `counts[pos..]`.
fn compositions<F>(counts: &mut [usize], pos: usize, remaining: usize, f: &mut F) -> Result<()>
where
    F: FnMut(&[usize]) -> Result<()>,
{
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        return f(counts);
    }
    for c in 0..=remaining {
        counts[pos] = c;
        compositions(counts, pos + 1, remaining - c, f)?;
    }
    Ok(())
}

/// Spectral radius of the monodromy `e^{A¹τ} e^{A⁰τ}` of the period-switching
/// schedule that spends `τ` in each mode; the linear system explodes iff > 1.
pub fn period_switch_growth(matrices: &[SquareMatrix], period: f64) -> Result<f64> {
    if matrices.len() != 2 {
        return Err(Error::DimensionMismatch {
            what: "period switching modes",
            expected: 2,
            found: matrices.len(),
        });
    }
    if !(period > 0.0) {
        return Err(Error::Domain(format!("period {period} must be positive")));
    }
    let e0 = expm(&matrices[0].scaled(period))?;
    let e1 = expm(&matrices[1].scaled(period))?;
    spectral_radius(&e1.matmul(&e0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::ConeTag;
    use crate::matrixcore::RateMatrix;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn averaged_limits() {
        let sys = LinearSwitchedSystem::new(
            vec![m(&[&[-4.0, 1.0], &[1.0, 0.0]]), m(&[&[0.0, 1.0], &[1.0, -4.0]])],
            RateMatrix::symmetric_pair(1.0).unwrap(),
            ConeTag::Orthant,
        )
        .unwrap();
        assert!((averaged_limit(&sys).unwrap().0 + 1.0).abs() < 1e-12);

        let sys = LinearSwitchedSystem::new(
            vec![
                m(&[&[-1.0, 4.0], &[1.0 / 16.0, -1.0]]),
                m(&[&[-1.0, 1.0 / 16.0], &[4.0, -1.0]]),
            ],
            RateMatrix::symmetric_pair(1.0).unwrap(),
            ConeTag::Orthant,
        )
        .unwrap();
        assert!((averaged_limit(&sys).unwrap().0 - 33.0 / 32.0).abs() < 1e-12);

        let a = m(&[&[-3.0, 1.0], &[2.0, -1.0]]);
        let sys = LinearSwitchedSystem::single(a.clone(), ConeTag::Orthant).unwrap();
        assert!((averaged_limit(&sys).unwrap().0 - spectral_abscissa(&a).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn averaged_limit_rejects_non_metzler() {
        let sys = LinearSwitchedSystem::single(m(&[&[0.0, -1.0], &[1.0, 0.0]]), ConeTag::FullSpace)
            .unwrap();
        assert!(matches!(averaged_limit(&sys), Err(Error::Precondition(_))));
    }

    #[test]
    fn hull_scan_single_and_triple() {
        let a = m(&[&[-1.0, 0.5], &[0.5, -1.0]]);
        let h = hurwitz_hull_check(&[a], 5).unwrap();
        assert!(h.all_hurwitz);
        // Three identical modes: grid 4 → C(3+2, 2) = 10 simplex points.
        let mut visited = 0;
        let mut counts = vec![0; 3];
        compositions(&mut counts, 0, 3, &mut |_| {
            visited += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(visited, 10);
    }

    #[test]
    fn period_switch_of_stable_scalars() {
        let minus = SquareMatrix::identity(2).scaled(-1.0);
        let r = period_switch_growth(&[minus.clone(), minus], 0.7).unwrap();
        assert!((r - (-1.4f64).exp()).abs() < 1e-12);
    }
}
