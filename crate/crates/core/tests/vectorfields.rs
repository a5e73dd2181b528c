use std::sync::Arc;

use pdmp_core::experiments::registry::{
    ainscosta_fields, astacoins_fields, fmg3d_matrices, ly3d_fields, nobra_fields,
};
use pdmp_core::matrixcore::{spectral_abscissa, ProbabilityVector, SquareMatrix};
use pdmp_core::vectorfields::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_fields() -> Vec<LajmanovichYorke> {
    [ainscosta_fields(), astacoins_fields(), ly3d_fields(), nobra_fields()].concat()
}

fn family(fields: &[LajmanovichYorke]) -> SwitchedFieldFamily {
    let d = fields[0].cure().len();
    let fs: Vec<Field> = fields.iter().map(|f| Arc::new(f.clone()) as Field).collect();
    SwitchedFieldFamily::new(fs, BoxDomain::unit_cube(d)).unwrap()
}

#[test]
fn builtin_fields_vanish_exactly_at_zero() {
    for f in all_fields() {
        let d = f.cure().len();
        assert!(f.eval(&vec![0.0; d]).iter().all(|v| *v == 0.0));
        let ones = f.eval(&vec![1.0; d]);
        let minus_d: Vec<f64> = f.cure().iter().map(|v| -v).collect();
        assert_eq!(ones, minus_d);
    }
}

#[test]
fn analytic_jacobians_match_differences_on_interior_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in all_fields() {
        let d = f.cure().len();
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..0.99)).collect();
            let a = f.jacobian(&x);
            let n = finite_difference_jacobian(&f, &x);
            for (u, v) in a.as_slice().iter().zip(n.as_slice()) {
                assert!((u - v).abs() <= 1e-6 * (1.0 + u.abs()), "{u} vs {v}");
            }
        }
    }
}

#[test]
fn linearizations_at_zero() {
    let fam = family(&astacoins_fields());
    let a = jacobian_at_zero(&fam).unwrap();
    assert_eq!(a[0].rows(), vec![vec![-1.0, 4.0], vec![1.0 / 16.0, -1.0]]);
    assert_eq!(a[1].rows(), vec![vec![-1.0, 1.0 / 16.0], vec![4.0, -1.0]]);
    let a = jacobian_at_zero(&family(&ly3d_fields())).unwrap();
    assert_eq!(a, fmg3d_matrices());
    let a = jacobian_at_zero(&family(&ainscosta_fields())).unwrap();
    assert_eq!(a[0].rows(), vec![vec![-4.0, 1.0], vec![1.0, 0.0]]);
}

#[test]
fn indicator_average_reproduces_each_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = family(&nobra_fields());
    for i in 0..2 {
        let avg = average_field(&fam, &ProbabilityVector::indicator(2, i)).unwrap();
        for _ in 0..100 {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            assert_eq!(avg.eval(&x), fam.field(i).eval(&x));
        }
    }
}

#[test]
fn averaged_infection_pair_has_the_expected_parameters() {
    let fields = astacoins_fields();
    let avg = LajmanovichYorke::average(&fields, &[0.5, 0.5]).unwrap();
    let c = avg.infection();
    assert_eq!(c.rows(), vec![vec![1.5, 65.0 / 32.0], vec![65.0 / 32.0, 1.5]]);
    assert_eq!(avg.cure(), &[2.5, 2.5]);
    assert!((spectral_abscissa(&avg.linearization()).unwrap() - 33.0 / 32.0).abs() < 1e-12);
    // The averaged family field and the averaged parameters agree.
    let fam = family(&fields);
    let f = average_field(&fam, &ProbabilityVector::uniform(2)).unwrap();
    for x in [[0.1, 0.7], [0.5, 0.5], [0.9, 0.05]] {
        let (u, v) = (f.eval(&x), avg.eval(&x));
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn endemic_equilibria_are_interior_zeros() {
    for fields in [astacoins_fields(), ainscosta_fields(), nobra_fields(), ly3d_fields()] {
        for f in &fields {
            if let Some(x) = endemic_equilibrium(f).unwrap() {
                assert!(x.iter().all(|v| *v > 0.0 && *v < 1.0));
                let r = f.eval(&x).iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(r <= 1e-10);
            } else {
                assert!(spectral_abscissa(&f.linearization()).unwrap() <= 0.0);
            }
        }
    }
    let x = endemic_equilibrium(&nobra_fields()[0]).unwrap().unwrap();
    assert!((x[0] - 0.5).abs() < 1e-10 && (x[1] - 0.5).abs() < 1e-10);
}

#[test]
fn irreducible_ly_fields_pass_the_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = &ainscosta_fields()[0];
    let report = check_epidemic(f, 10_000, 1);
    assert!(report.all_passed(), "{report:?}");
    for d in [2, 3, 4] {
        let c = SquareMatrix::from_row_major(d, (0..d * d).map(|_| rng.random_range(0.1..3.0)).collect()).unwrap();
        let dd: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..3.0)).collect();
        let f = LajmanovichYorke::new(c, dd).unwrap();
        assert!(check_epidemic(&f, 500, 2).all_passed());
    }
}

#[test]
fn audit_flags_decoupled_and_linear_fields() {
    let neg = LinearField::new(SquareMatrix::diagonal(&[-1.0, -1.0]).unwrap());
    assert!(!check_epidemic(&neg, 200, 1).check(Axiom::E4).passed);
    let lin = LinearField::new(SquareMatrix::from_rows(vec![vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap());
    assert!(!check_epidemic(&lin, 200, 1).check(Axiom::E5).passed);
}

#[test]
fn out_of_cube_evaluation_is_a_domain_error() {
    let f = &nobra_fields()[0];
    assert!(f.velocity(&[1.2, 0.5]).is_err());
    assert!(f.velocity(&[0.5, 0.5]).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn tampered_cure_moves_the_golden_abscissa() {
    let mut fields = ainscosta_fields();
    let mut d = fields[0].cure().to_vec();
    d[0] += 1.0;
    fields[0] = LajmanovichYorke::new(fields[0].infection().clone(), d).unwrap();
    let l = spectral_abscissa(&fields[0].linearization()).unwrap();
    assert!((l - (5f64.sqrt() - 2.0)).abs() > 1e-3);
}

#[test]
fn ly3d_modes_are_individually_reducible() {
    // Only the switching couples all three groups.
    for f in ly3d_fields() {
        let r = check_epidemic(&f, 200, 4);
        assert!(!r.check(Axiom::E4).passed);
        assert!(r.check(Axiom::E3).passed && r.check(Axiom::E1).passed);
    }
    let avg = LajmanovichYorke::average(&ly3d_fields(), &[0.5, 0.5]).unwrap();
    assert!(check_epidemic(&avg, 200, 4).check(Axiom::E4).passed);
}
