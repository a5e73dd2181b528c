use pdmp_core::matrixcore::*;
use proptest::prelude::*;

fn m(rows: &[&[f64]]) -> SquareMatrix {
    SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn dense_abscissa(a: &SquareMatrix) -> f64 {
    // Independent oracle: complex eigenvalues of the nalgebra matrix.
    a.to_nalgebra()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn golden_abscissae() {
    let r5 = 5f64.sqrt() - 2.0;
    assert!((spectral_abscissa(&m(&[&[-4.0, 1.0], &[1.0, 0.0]])).unwrap() - r5).abs() < 1e-12);
    let c = 65.0 / 32.0;
    assert!((spectral_abscissa(&m(&[&[-1.0, c], &[c, -1.0]])).unwrap() - 33.0 / 32.0).abs() < 1e-12);
    for d in 1..6 {
        assert_eq!(spectral_abscissa(&SquareMatrix::zeros(d)).unwrap(), 0.0);
    }
}

#[test]
fn predicates_on_builtin_matrices() {
    assert!(is_hurwitz(&m(&[&[-1.0, 1.0 / 16.0], &[4.0, -1.0]])).unwrap());
    assert!(!is_hurwitz(&m(&[&[-4.0, 1.0], &[1.0, 0.0]])).unwrap());
    assert!(!is_hurwitz(&SquareMatrix::identity(3)).unwrap());
    assert!(is_irreducible(&m(&[&[-1.0, 4.0], &[1.0 / 16.0, -1.0]])));
    assert!(!is_irreducible(&m(&[
        &[-1.0, 0.0, 0.0],
        &[10.0, -1.0, 0.0],
        &[0.0, 0.0, -10.0]
    ])));
    assert!(is_irreducible(&m(&[&[5.0]])));
    assert!(is_metzler(&SquareMatrix::diagonal(&[-5.0, 3.0]).unwrap()));
    assert!(!is_metzler(&m(&[&[0.0, -1.0], &[0.0, 0.0]])));
}

#[test]
fn three_cycle_matches_linear_solve() {
    let q = RateMatrix::from_rows(vec![
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
    ])
    .unwrap();
    let p = stationary_distribution(&q).unwrap();
    for v in p.as_slice() {
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }
}

#[test]
fn planar_common_equilibrium_linearization_is_dissipative() {
    // B^i = DF^i(1/2, 1/2) for the two fields sharing (1/2, 1/2):
    // ∂F_i/∂x_j = (1−x_i)C_ij, ∂F_i/∂x_i gains −Σ_j C_ij x_j − D_i.
    let b = |c: [[f64; 2]; 2], d: [f64; 2]| {
        let x = [0.5, 0.5];
        let mut rows = vec![vec![0.0; 2]; 2];
        for i in 0..2 {
            let cx: f64 = (0..2).map(|j| c[i][j] * x[j]).sum();
            for j in 0..2 {
                rows[i][j] = (1.0 - x[i]) * c[i][j];
            }
            rows[i][i] += -cx - d[i];
        }
        SquareMatrix::from_rows(rows).unwrap()
    };
    let b0 = b([[1.0, 3.0], [2.0, 4.0]], [2.0, 3.0]);
    let b1 = b([[6.0, 2.0], [7.0, 3.0]], [4.0, 5.0]);
    let (_, upper) = growth_rate_bounds(&[b0, b1], &ProbabilityVector::uniform(2)).unwrap();
    assert!(upper < 0.0, "upper bound {upper}");
}

#[test]
fn trace_bound_of_traceless_pair() {
    let a0 = m(&[&[-1.0, 3.0], &[2.0, 1.0]]);
    let a1 = m(&[&[2.0, 2.0], &[7.0, -2.0]]);
    let v = trace_lower_bound(&[a0.clone(), a1.clone()], &ProbabilityVector::uniform(2), 2).unwrap();
    assert_eq!(v, 0.0);
    // Both variants of the planar estimate are positive here.
    let p = ProbabilityVector::uniform(2);
    assert!(mierczynski_bound_2d(&[a0.clone(), a1.clone()], &p, OffDiagonalTerm::Sum).unwrap() > 0.0);
    assert!(mierczynski_bound_2d(&[a0, a1], &p, OffDiagonalTerm::Product).unwrap() > 0.0);
}

#[test]
fn planar_estimates_on_swap_matrix() {
    let a = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let p = ProbabilityVector::uniform(1);
    let sum = mierczynski_bound_2d(std::slice::from_ref(&a), &p, OffDiagonalTerm::Sum).unwrap();
    let prod = mierczynski_bound_2d(std::slice::from_ref(&a), &p, OffDiagonalTerm::Product).unwrap();
    assert!((sum - 2f64.sqrt()).abs() < 1e-15);
    assert!((prod - 1.0).abs() < 1e-15);
    let diag = SquareMatrix::diagonal(&[-1.0, 3.0]).unwrap();
    let half_trace = 0.5 * diag.trace();
    for term in [OffDiagonalTerm::Sum, OffDiagonalTerm::Product] {
        let v = mierczynski_bound_2d(std::slice::from_ref(&diag), &p, term).unwrap();
        assert!((v - half_trace).abs() < 1e-15);
    }
}

#[test]
fn birkhoff_of_two_by_two() {
    let t = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
    assert!((birkhoff_contraction(&t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

fn metzler_irreducible(d: usize) -> impl Strategy<Value = SquareMatrix> {
    (
        prop::collection::vec(-5.0..5.0f64, d),
        prop::collection::vec(0.05..3.0f64, d * d),
    )
        .prop_map(move |(diag, off)| {
            let mut a = SquareMatrix::from_row_major(d, off).unwrap();
            for (i, v) in diag.iter().enumerate() {
                a.set(i, i, *v);
            }
            a
        })
}

fn generator(n: usize) -> impl Strategy<Value = RateMatrix> {
    prop::collection::vec(0.01..10.0f64, n * n).prop_map(move |mut v| {
        for i in 0..n {
            v[i * n + i] = 0.0;
        }
        RateMatrix::new(SquareMatrix::from_row_major(n, v).unwrap()).unwrap()
    })
}

fn positive(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..5.0f64, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perron_eigenvalue_is_the_abscissa(a in (2usize..6).prop_flat_map(metzler_irreducible)) {
        let (lambda, theta) = perron_vector(&a).unwrap();
        prop_assert!((lambda - dense_abscissa(&a)).abs() < 1e-9);
        prop_assert!((lambda - spectral_abscissa(&a).unwrap()).abs() < 1e-9);
        prop_assert!(theta.iter().all(|v| *v > 0.0));
        let at = a.mul_vec(&theta);
        let res = at.iter().zip(&theta).map(|(u, v)| (u - lambda * v).abs()).fold(0.0, f64::max);
        prop_assert!(res < 1e-10);
    }

    #[test]
    fn stationary_law_balances_and_is_relabeling_stable(q in (2usize..7).prop_flat_map(generator), shift in 1usize..6) {
        let p = stationary_distribution(&q).unwrap();
        prop_assert!(balance_residual(&q, p.as_slice()) <= 1e-12);
        // Re-solve with the modes cyclically relabeled.
        let n = q.modes();
        let k = shift % n;
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set((i + k) % n, (j + k) % n, q.rate(i, j));
            }
        }
        let p2 = stationary_distribution(&RateMatrix::new(m).unwrap()).unwrap();
        for i in 0..n {
            prop_assert!((p[i] - p2[(i + k) % n]).abs() < 1e-10);
        }
    }

    #[test]
    fn birkhoff_inequality(
        (t, x, y) in prop::sample::select(vec![2usize, 3, 5]).prop_flat_map(|d| (
            prop::collection::vec(0.01..5.0f64, d * d).prop_map(move |v| SquareMatrix::from_row_major(d, v).unwrap()),
            positive(d),
            positive(d),
        ))
    ) {
        let tau = birkhoff_contraction(&t).unwrap();
        prop_assert!((0.0..1.0).contains(&tau));
        let lhs = hilbert_metric(&t.mul_vec(&x), &t.mul_vec(&y)).unwrap();
        prop_assert!(lhs <= tau * hilbert_metric(&x, &y).unwrap() + 1e-12);
    }

    #[test]
    fn hilbert_metric_is_projective(x in positive(4), y in positive(4), a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
        let xs: Vec<f64> = x.iter().map(|v| a * v).collect();
        let ys: Vec<f64> = y.iter().map(|v| b * v).collect();
        let d0 = hilbert_metric(&x, &y).unwrap();
        prop_assert!((hilbert_metric(&xs, &ys).unwrap() - d0).abs() <= 1e-12);
        prop_assert!(d0 >= 0.0);
    }

    #[test]
    fn part_metric_support_patterns(x in prop::collection::vec(prop::option::of(0.1..2.0f64), 3),
                                    y in prop::collection::vec(prop::option::of(0.1..2.0f64), 3)) {
        let xv: Vec<f64> = x.iter().map(|v| v.unwrap_or(0.0)).collect();
        let yv: Vec<f64> = y.iter().map(|v| v.unwrap_or(0.0)).collect();
        let same = x.iter().zip(&y).all(|(a, b)| a.is_some() == b.is_some());
        let p = part_metric(&xv, &yv);
        prop_assert_eq!(p.is_finite(), same);
        prop_assert_eq!(p, part_metric(&yv, &xv));
        prop_assert_eq!(part_metric(&xv, &xv), 0.0);
    }
}

#[test]
fn birkhoff_inequality_on_a_thousand_triples_per_dimension() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for d in [2, 3, 5] {
        for _ in 0..1000 {
            let t = SquareMatrix::from_row_major(d, (0..d * d).map(|_| rng.random_range(0.01..5.0)).collect()).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..5.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..5.0)).collect();
            let tau = birkhoff_contraction(&t).unwrap();
            let lhs = hilbert_metric(&t.mul_vec(&x), &t.mul_vec(&y)).unwrap();
            assert!(lhs <= tau * hilbert_metric(&x, &y).unwrap() + 1e-12);
        }
    }
}
