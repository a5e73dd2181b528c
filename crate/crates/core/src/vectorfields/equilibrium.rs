use super::field::VectorField;
use crate::error::{Error, Result};
use crate::matrixcore::{is_irreducible, is_metzler, perron_vector, spectral_abscissa, SquareMatrix};
use crate::pdmp::ode::Rk4;

const START_SCALE: f64 = 1e-3;
const FLOW_VELOCITY_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-10;
const MAX_FLOW_TIME: f64 = 1e5;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Interior zero `x* ∈ (0,1)^d` of an epidemic field, or `None` when
/// `λ(DF(0)) ≤ 0` (the disease-free state is then globally attracting).
///
/// Forward integration from `εθ` (θ the Perron direction of `DF(0)`) until
/// the velocity drops below `1e-8`, then damped Newton polishing.
pub fn endemic_equilibrium<V: VectorField + ?Sized>(field: &V) -> Result<Option<Vec<f64>>> {
    let d = field.dim();
    let a = field.jacobian(&vec![0.0; d]);
    if spectral_abscissa(&a)? <= 0.0 {
        return Ok(None);
    }
    let direction = if is_metzler(&a) && is_irreducible(&a) {
        perron_vector(&a)?.1
    } else {
        vec![1.0 / (d as f64).sqrt(); d]
    };
    let mut x: Vec<f64> = direction.iter().map(|t| START_SCALE * t).collect();

    let h = 0.05 / (1.0 + a.max_abs() * d as f64);
    let mut rk = Rk4::new(d);
    let mut v = vec![0.0; d];
    let mut t = 0.0;
    loop {
        field.eval_into(&x, &mut v);
        if norm(&v) < FLOW_VELOCITY_TOL || t > MAX_FLOW_TIME {
            break;
        }
        for _ in 0..100 {
            rk.step(field, &mut x, h);
        }
        for xi in x.iter_mut() {
            *xi = xi.clamp(0.0, 1.0);
        }
        t += 100.0 * h;
    }

    let x = newton_polish(field, x)?;
    let residual = norm(&field.eval(&x));
    if residual > RESIDUAL_TOL || x.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
        return Err(Error::NewtonDivergence { last: x });
    }
    Ok(Some(x))
}

fn solve(j: &SquareMatrix, rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = j.to_nalgebra().lu();
    let b = nalgebra::DVector::from_column_slice(rhs);
    lu.solve(&b).map(|s| s.iter().copied().collect())
}

fn newton_polish<V: VectorField + ?Sized>(field: &V, mut x: Vec<f64>) -> Result<Vec<f64>> {
    let mut f = field.eval(&x);
    let mut r = norm(&f);
    for _ in 0..50 {
        if r < 1e-15 {
            break;
        }
        let step = solve(&field.jacobian(&x), &f).ok_or_else(|| Error::NewtonDivergence {
            last: x.clone(),
        })?;
        let mut damping = 1.0;
        let mut accepted = false;
        while damping > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - damping * s).collect();
            if trial.iter().all(|v| *v > 0.0 && *v < 1.0) {
                let ft = field.eval(&trial);
                let rt = norm(&ft);
                if rt < r {
                    x = trial;
                    f = ft;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r > RESIDUAL_TOL {
        return Err(Error::NewtonDivergence { last: x });
    }
    Ok(x)
}
