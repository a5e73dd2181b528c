//! Lajmanovich-Yorke multigroup SIS fields on the unit cube:
//! `ẋ_i = (1 − x_i) Σ_j C_ij x_j − D_i x_i`.

use serde::{Deserialize, Serialize};

use super::field::VectorField;
use crate::error::{Error, Result};
use crate::matrixcore::SquareMatrix;

/// Infection matrix `C ≥ 0` and cure rates `D > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LyRepr", into = "LyRepr")]
pub struct LajmanovichYorke {
    infection: SquareMatrix,
    cure: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LyRepr {
    #[serde(rename = "C")]
    c: SquareMatrix,
    #[serde(rename = "D")]
    d: Vec<f64>,
}

impl TryFrom<LyRepr> for LajmanovichYorke {
    type Error = Error;

    fn try_from(r: LyRepr) -> Result<Self> {
        Self::new(r.c, r.d)
    }
}

impl From<LajmanovichYorke> for LyRepr {
    fn from(f: LajmanovichYorke) -> Self {
        LyRepr {
            c: f.infection,
            d: f.cure,
        }
    }
}

impl LajmanovichYorke {
    pub fn new(infection: SquareMatrix, cure: Vec<f64>) -> Result<Self> {
        if cure.len() != infection.dim() {
            return Err(Error::DimensionMismatch {
                what: "cure rates",
                expected: infection.dim(),
                found: cure.len(),
            });
        }
        if infection.as_slice().iter().any(|c| *c < 0.0) {
            return Err(Error::Domain("infection matrix must be nonnegative".into()));
        }
        if cure.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::Domain("cure rates must be positive".into()));
        }
        Ok(Self { infection, cure })
    }

    /// The field whose linearization at 0 is `a`, with cure rates `cure`:
    /// `C = A + diag(D)`.
    pub fn from_linearization(a: &SquareMatrix, cure: Vec<f64>) -> Result<Self> {
        let d = SquareMatrix::diagonal(&cure)?;
        Self::new(a.add_scaled(1.0, &d), cure)
    }

    pub fn infection(&self) -> &SquareMatrix {
        &self.infection
    }

    pub fn cure(&self) -> &[f64] {
        &self.cure
    }

    /// `C − diag(D)`.
    pub fn linearization(&self) -> SquareMatrix {
        let d = SquareMatrix::diagonal(&self.cure).expect("finite cure rates");
        self.infection.add_scaled(-1.0, &d)
    }

    /// Convex combination of LY fields, again LY with averaged `(C, D)`.
    pub fn average(fields: &[LajmanovichYorke], weights: &[f64]) -> Result<Self> {
        let cs: Vec<SquareMatrix> = fields.iter().map(|f| f.infection.clone()).collect();
        let c = SquareMatrix::combination(&cs, weights)?;
        let mut d = vec![0.0; c.dim()];
        for (f, &w) in fields.iter().zip(weights) {
            for (di, fi) in d.iter_mut().zip(&f.cure) {
                *di += w * fi;
            }
        }
        Self::new(c, d)
    }

    fn check_cube(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "LY state",
                expected: self.dim(),
                found: x.len(),
            });
        }
        match x.iter().position(|v| !(0.0..=1.0).contains(v)) {
            Some(i) => Err(Error::Domain(format!(
                "state component {i} = {} outside [0, 1]",
                x[i]
            ))),
            None => Ok(()),
        }
    }

    /// Checked evaluation on the unit cube.
    pub fn velocity(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_cube(x)?;
        Ok(self.eval(x))
    }

    /// Checked analytic Jacobian on the unit cube.
    pub fn jacobian_checked(&self, x: &[f64]) -> Result<SquareMatrix> {
        self.check_cube(x)?;
        Ok(self.jacobian(x))
    }
}

impl VectorField for LajmanovichYorke {
    fn dim(&self) -> usize {
        self.cure.len()
    }

    #[inline]
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.cure.len();
        let c = self.infection.as_slice();
        for i in 0..d {
            let row = &c[i * d..(i + 1) * d];
            let force: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            out[i] = (1.0 - x[i]) * force - self.cure[i] * x[i];
        }
    }

    fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        let d = self.dim();
        let mut j = SquareMatrix::zeros(d);
        for i in 0..d {
            let force: f64 = (0..d).map(|k| self.infection.get(i, k) * x[k]).sum();
            for k in 0..d {
                let mut v = (1.0 - x[i]) * self.infection.get(i, k);
                if k == i {
                    v -= force + self.cure[i];
                }
                j.set(i, k, v);
            }
        }
        j
    }

    fn name(&self) -> String {
        format!("LY(C={}, D={:?})", self.infection, self.cure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorfields::finite_difference_jacobian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ly(c: &[&[f64]], d: &[f64]) -> LajmanovichYorke {
        LajmanovichYorke::new(
            SquareMatrix::from_rows(c.iter().map(|r| r.to_vec()).collect()).unwrap(),
            d.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn common_equilibrium_of_planar_pair() {
        let f0 = ly(&[&[1.0, 3.0], &[2.0, 4.0]], &[2.0, 3.0]);
        let f1 = ly(&[&[6.0, 2.0], &[7.0, 3.0]], &[4.0, 5.0]);
        assert_eq!(f0.velocity(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(f1.velocity(&[0.5, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn values_at_cube_corners() {
        let f = ly(&[&[2.0, 1.0], &[1.0, 1.0]], &[6.0, 1.0]);
        assert_eq!(f.velocity(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(f.velocity(&[1.0, 1.0]).unwrap(), vec![-6.0, -1.0]);
        assert!(f.velocity(&[1.2, 0.0]).is_err());
    }

    #[test]
    fn jacobian_at_zero_is_c_minus_d() {
        let f = ly(&[&[2.0, 1.0], &[1.0, 1.0]], &[6.0, 1.0]);
        let j = f.jacobian_checked(&[0.0, 0.0]).unwrap();
        assert_eq!(j.rows(), vec![vec![-4.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(j, f.linearization());
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.random_range(1..5);
            let c: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(0.0..5.0)).collect())
                .collect();
            let cure: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..5.0)).collect();
            let f = LajmanovichYorke::new(SquareMatrix::from_rows(c).unwrap(), cure).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..0.99)).collect();
            let ja = f.jacobian(&x);
            let jf = finite_difference_jacobian(&f, &x);
            for (a, b) in ja.as_slice().iter().zip(jf.as_slice()) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn averaging_is_affine_in_parameters() {
        let f0 = ly(&[&[1.0, 4.0], &[1.0 / 16.0, 1.0]], &[2.0, 2.0]);
        let f1 = ly(&[&[2.0, 1.0 / 16.0], &[4.0, 2.0]], &[3.0, 3.0]);
        let avg = LajmanovichYorke::average(&[f0.clone(), f1.clone()], &[0.5, 0.5]).unwrap();
        let x = [0.3, 0.7];
        let direct: Vec<f64> = f0
            .eval(&x)
            .iter()
            .zip(f1.eval(&x))
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        for (a, b) in avg.eval(&x).iter().zip(direct) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(avg.cure(), &[2.5, 2.5]);
    }

    #[test]
    fn json_schema() {
        let f = ly(&[&[2.0, 1.0], &[1.0, 1.0]], &[6.0, 1.0]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"C":[[2.0,1.0],[1.0,1.0]],"D":[6.0,1.0]}"#);
        let back: LajmanovichYorke = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<LajmanovichYorke>(r#"{"C":[[1.0]],"D":[0.0]}"#).is_err());
    }
}
