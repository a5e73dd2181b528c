use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{Complex, DMatrix, DVector};

use super::matrix::{ProbabilityVector, RateMatrix, SquareMatrix};
use crate::error::{Error, Result};

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// All eigenvalues of a general real matrix (real Schur form).
pub fn eigenvalues(a: &SquareMatrix) -> Result<Vec<Complex<f64>>> {
    let schur = Schur::try_new(a.to_nalgebra(), SCHUR_EPS, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::EigenNonConvergence {
            matrix: a.to_string(),
        }
    })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// `λ(A)`: the largest real part among the eigenvalues of `A`.
pub fn spectral_abscissa(a: &SquareMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn spectral_radius(a: &SquareMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Smallest and largest eigenvalue of the symmetric part `(A + Aᵀ)/2`.
pub fn symmetric_extremes(a: &SquareMatrix) -> (f64, f64) {
    let eig = SymmetricEigen::new(a.symmetric_part().to_nalgebra());
    eig.eigenvalues.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), &v| (lo.min(v), hi.max(v)),
    )
}

/// Every off-diagonal entry is nonnegative (exact sign test).
pub fn is_metzler(a: &SquareMatrix) -> bool {
    let d = a.dim();
    (0..d).all(|i| (0..d).all(|j| i == j || a.get(i, j) >= 0.0))
}

pub fn is_hurwitz(a: &SquareMatrix) -> Result<bool> {
    Ok(spectral_abscissa(a)? < 0.0)
}

/// Strong connectivity of the graph with an edge `i → j` whenever
/// `A_ij ≠ 0`, `i ≠ j`.
pub fn is_irreducible(a: &SquareMatrix) -> bool {
    unreachable_pair(a).is_none()
}

/// A pair `(from, to)` such that `to` cannot be reached from `from`, or
/// `None` if the off-diagonal support graph is strongly connected.
pub(crate) fn unreachable_pair(a: &SquareMatrix) -> Option<(usize, usize)> {
    let d = a.dim();
    let reach = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                let w = if forward { a.get(i, j) } else { a.get(j, i) };
                if j != i && w != 0.0 && !*s {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen
    };
    if let Some(j) = reach(true).iter().position(|&s| !s) {
        return Some((0, j));
    }
    if let Some(j) = reach(false).iter().position(|&s| !s) {
        return Some((j, 0));
    }
    None
}

/// Residual of the balance equations `Σ_j (p_j a_ji − p_i a_ij) = 0`, max norm.
pub fn balance_residual(q: &RateMatrix, p: &[f64]) -> f64 {
    let n = q.modes();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| p[j] * q.rate(j, i) - p[i] * q.rate(i, j))
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

/// The unique invariant probability of the mode chain driven by `q`.
pub fn stationary_distribution(q: &RateMatrix) -> Result<ProbabilityVector> {
    q.ensure_irreducible()?;
    let n = q.modes();
    if n == 1 {
        return Ok(ProbabilityVector::uniform(1));
    }
    // Rows 0..n-1 of Gᵀ p = 0, last row replaced by Σ p = 1.
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[(i, j)] += q.rate(j, i);
                m[(i, i)] -= q.rate(i, j);
            }
        }
    }
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = m.clone().lu();
    let mut p = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Precondition("singular balance system".into()))?;
    // One step of iterative refinement.
    let r = &rhs - &m * &p;
    if let Some(dp) = lu.solve(&r) {
        p += dp;
    }
    let mut w: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    ProbabilityVector::new(w)
}

/// Perron eigenpair of a Metzler irreducible matrix: `(λ(A), θ)` with `θ`
/// strictly positive, unit Euclidean norm, `Aθ = λ(A)θ`.
///
/// Power iteration on `A + rI`, `r = max|A_ii| + 1`, started from the
/// normalized all-ones vector; stops when successive iterates agree to
/// `1e-12` in max norm.
pub fn perron_vector(a: &SquareMatrix) -> Result<(f64, Vec<f64>)> {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 100_000;

    if !is_metzler(a) {
        return Err(Error::Precondition(format!("matrix {a} is not Metzler")));
    }
    if !is_irreducible(a) {
        return Err(Error::Precondition(format!("matrix {a} is not irreducible")));
    }
    let d = a.dim();
    let shift = (0..d).map(|i| a.get(i, i).abs()).fold(0.0, f64::max) + 1.0;
    let b = a.add_scaled(shift, &SquareMatrix::identity(d));

    let mut x = vec![1.0 / (d as f64).sqrt(); d];
    let mut y = vec![0.0; d];
    for _ in 0..MAX_ITER {
        b.mul_vec_into(&x, &mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        let diff = x
            .iter()
            .zip(&y)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut y);
        if diff < TOL {
            let ax = a.mul_vec(&x);
            let lambda: f64 = ax.iter().zip(&x).map(|(u, v)| u * v).sum();
            return Ok((lambda, x));
        }
    }
    Err(Error::PerronNonConvergence {
        iterations: MAX_ITER,
    })
}

/// `e^{A}` by scaling and squaring with a Padé approximant.
pub fn expm(a: &SquareMatrix) -> Result<SquareMatrix> {
    let e = a.to_nalgebra().exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow {
            factor: f64::INFINITY,
        });
    }
    SquareMatrix::from_nalgebra(&e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn golden_abscissae() {
        let a = m(&[&[-4.0, 1.0], &[1.0, 0.0]]);
        assert!((spectral_abscissa(&a).unwrap() - (5f64.sqrt() - 2.0)).abs() < 1e-12);
        assert_eq!(spectral_abscissa(&SquareMatrix::zeros(3)).unwrap(), 0.0);
        let avg = m(&[&[-1.0, 65.0 / 32.0], &[65.0 / 32.0, -1.0]]);
        assert!((spectral_abscissa(&avg).unwrap() - 33.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_abscissa() {
        // Rotation plus damping: eigenvalues -0.5 ± 2i.
        let a = m(&[&[-0.5, 2.0], &[-2.0, -0.5]]);
        assert!((spectral_abscissa(&a).unwrap() + 0.5).abs() < 1e-12);
        assert!((spectral_radius(&a).unwrap() - 4.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn metzler_predicate() {
        assert!(is_metzler(&m(&[&[-4.0, 1.0], &[1.0, 0.0]])));
        assert!(!is_metzler(&m(&[&[0.0, -1.0], &[0.0, 0.0]])));
        assert!(is_metzler(&SquareMatrix::diagonal(&[-5.0, 3.0]).unwrap()));
    }

    #[test]
    fn hurwitz_predicate() {
        assert!(is_hurwitz(&m(&[&[-1.0, 1.0 / 16.0], &[4.0, -1.0]])).unwrap());
        assert!(!is_hurwitz(&m(&[&[-4.0, 1.0], &[1.0, 0.0]])).unwrap());
        assert!(!is_hurwitz(&SquareMatrix::identity(3)).unwrap());
    }

    #[test]
    fn irreducibility() {
        assert!(is_irreducible(&m(&[&[-1.0, 4.0], &[1.0 / 16.0, -1.0]])));
        assert!(!is_irreducible(&m(&[
            &[-1.0, 0.0, 0.0],
            &[10.0, -1.0, 0.0],
            &[0.0, 0.0, -10.0]
        ])));
        assert!(is_irreducible(&m(&[&[5.0]])));
    }

    #[test]
    fn stationary_examples() {
        let q = RateMatrix::symmetric_pair(7.5).unwrap();
        let p = stationary_distribution(&q).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);

        let (beta, t) = (3.0, 0.3);
        let q = RateMatrix::from_rows(vec![vec![0.0, beta * t], vec![beta * (1.0 - t), 0.0]]).unwrap();
        let p = stationary_distribution(&q).unwrap();
        assert!((p[0] - (1.0 - t)).abs() < 1e-14 && (p[1] - t).abs() < 1e-14);
        assert!(balance_residual(&q, p.as_slice()) <= 1e-12);
    }

    #[test]
    fn stationary_three_cycle() {
        // Oracle: the balance equations of a rate-1 directed 3-cycle read
        // p3 = p1, p1 = p2, p2 = p3, so p = (1/3, 1/3, 1/3).
        let q = RateMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        let p = stationary_distribution(&q).unwrap();
        for i in 0..3 {
            assert!((p[i] - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn stationary_rejects_reducible() {
        let q = RateMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            stationary_distribution(&q),
            Err(Error::Reducible { from: 0, to: 2 })
        ));
    }

    #[test]
    fn perron_examples() {
        let (l, v) = perron_vector(&m(&[&[-2.0, 1.0], &[1.0, -2.0]])).unwrap();
        let s = 0.5f64.sqrt();
        assert!((l + 1.0).abs() < 1e-12);
        assert!((v[0] - s).abs() < 1e-11 && (v[1] - s).abs() < 1e-11);

        let c = 65.0 / 32.0;
        let (l, v) = perron_vector(&m(&[&[-1.0, c], &[c, -1.0]])).unwrap();
        assert!((l - 33.0 / 32.0).abs() < 1e-12);
        assert!((v[0] - s).abs() < 1e-11 && (v[1] - s).abs() < 1e-11);
    }

    #[test]
    fn perron_preconditions() {
        assert!(matches!(
            perron_vector(&m(&[&[0.0, -1.0], &[1.0, 0.0]])),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            perron_vector(&SquareMatrix::diagonal(&[-1.0, -2.0]).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn expm_of_diagonal() {
        let e = expm(&SquareMatrix::diagonal(&[1.0, -2.0]).unwrap()).unwrap();
        assert!((e.get(0, 0) - 1f64.exp()).abs() < 1e-13);
        assert!((e.get(1, 1) - (-2f64).exp()).abs() < 1e-15);
        assert_eq!(e.get(0, 1), 0.0);
    }
}
