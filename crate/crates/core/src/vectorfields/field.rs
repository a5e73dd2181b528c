use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{ProbabilityVector, SquareMatrix};

/// A smooth vector field on a box of `ℝ^d`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    /// `out = F(x)`. Hot path; no validation.
    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// `DF(x)`. Defaults to central finite differences.
    fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        finite_difference_jacobian(self, x)
    }

    fn name(&self) -> String {
        "field".to_string()
    }
}

/// Shared, immutable handle to a vector field.
pub type Field = Arc<dyn VectorField>;

/// Central differences with step `h = 1e-6 (1 + ‖x‖)`.
pub fn finite_difference_jacobian<V: VectorField + ?Sized>(field: &V, x: &[f64]) -> SquareMatrix {
    let d = field.dim();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-6 * (1.0 + norm);
    let mut jac = SquareMatrix::zeros(d);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; d];
    let mut fm = vec![0.0; d];
    for j in 0..d {
        xp[j] = x[j] + h;
        field.eval_into(&xp, &mut fp);
        xp[j] = x[j] - h;
        field.eval_into(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..d {
            jac.set(i, j, (fp[i] - fm[i]) / (2.0 * h));
        }
    }
    jac
}

/// `x ↦ A x`.
#[derive(Debug, Clone)]
pub struct LinearField {
    matrix: SquareMatrix,
}

impl LinearField {
    pub fn new(matrix: SquareMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.mul_vec_into(x, out);
    }

    fn jacobian(&self, _x: &[f64]) -> SquareMatrix {
        self.matrix.clone()
    }

    fn name(&self) -> String {
        format!("linear{}", self.matrix)
    }
}

type EvalFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> SquareMatrix + Send + Sync;

/// A field given by closures; the Jacobian falls back to finite differences
/// when no analytic one is supplied.
#[derive(Clone)]
pub struct FnField {
    name: String,
    dim: usize,
    eval: Arc<EvalFn>,
    jac: Option<Arc<JacFn>>,
}

impl FnField {
    pub fn new<F>(name: impl Into<String>, dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            jac: None,
        }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64]) -> SquareMatrix + Send + Sync + 'static,
    {
        self.jac = Some(Arc::new(jac));
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        match &self.jac {
            Some(j) => j(x),
            None => finite_difference_jacobian(self, x),
        }
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Pointwise convex combination `Σ p_i F^i`.
#[derive(Clone)]
pub struct AverageField {
    fields: Vec<Field>,
    weights: Vec<f64>,
}

impl VectorField for AverageField {
    fn dim(&self) -> usize {
        self.fields[0].dim()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; out.len()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for (f, &w) in self.fields.iter().zip(&self.weights) {
            if w == 0.0 {
                continue;
            }
            f.eval_into(x, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w * b;
            }
        }
    }

    fn jacobian(&self, x: &[f64]) -> SquareMatrix {
        let jacs: Vec<SquareMatrix> = self.fields.iter().map(|f| f.jacobian(x)).collect();
        SquareMatrix::combination(&jacs, &self.weights).expect("fields share a dimension")
    }

    fn name(&self) -> String {
        format!("average{:?}", self.weights)
    }
}

/// Axis-aligned box `Π [lower_i, upper_i]` (bounds may be infinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    /// Components closer than this to the box are projected back onto it.
    pub const CLAMP_TOLERANCE: f64 = 1e-9;

    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::Domain("box lower bound exceeds upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    /// Membership up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    /// Projects near-boundary leakage back into the box; anything further
    /// out than [`Self::CLAMP_TOLERANCE`] (or non-finite) is an error.
    #[inline]
    pub fn clamp<V: VectorField + ?Sized>(&self, x: &mut [f64], field: &V) -> Result<()> {
        for i in 0..x.len() {
            let (l, u) = (self.lower[i], self.upper[i]);
            let v = x[i];
            if v >= l && v <= u {
                continue;
            }
            let overshoot = if v < l { l - v } else { v - u };
            if !(overshoot <= Self::CLAMP_TOLERANCE) {
                return Err(Error::InvarianceViolation {
                    field: field.name(),
                    state: x.to_vec(),
                    overshoot,
                });
            }
            x[i] = v.clamp(l, u);
        }
        Ok(())
    }
}

/// One vector field per mode on a common box, all vanishing at the origin.
#[derive(Clone)]
pub struct SwitchedFieldFamily {
    fields: Vec<Field>,
    domain: BoxDomain,
}

impl SwitchedFieldFamily {
    /// `‖F^i(0)‖` above this is a common-zero violation.
    pub const COMMON_ZERO_TOLERANCE: f64 = 1e-9;

    pub fn new(fields: Vec<Field>, domain: BoxDomain) -> Result<Self> {
        let d = fields
            .first()
            .ok_or_else(|| Error::Domain("family needs at least one field".into()))?
            .dim();
        if let Some(f) = fields.iter().find(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch {
                what: "field family",
                expected: d,
                found: f.dim(),
            });
        }
        if domain.dim() != d {
            return Err(Error::DimensionMismatch {
                what: "family domain",
                expected: d,
                found: domain.dim(),
            });
        }
        let zero = vec![0.0; d];
        for (mode, f) in fields.iter().enumerate() {
            let norm = f.eval(&zero).iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm <= Self::COMMON_ZERO_TOLERANCE) {
                return Err(Error::CommonZeroViolation { mode, norm });
            }
        }
        Ok(Self { fields, domain })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn modes(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn field(&self, mode: usize) -> &Field {
        &self.fields[mode]
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }
}

/// `Aⁱ = DFⁱ(0)` for every mode; analytic where the field provides it.
pub fn jacobian_at_zero(family: &SwitchedFieldFamily) -> Result<Vec<SquareMatrix>> {
    let zero = vec![0.0; family.dim()];
    family
        .fields()
        .iter()
        .enumerate()
        .map(|(mode, f)| {
            let norm = f.eval(&zero).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > SwitchedFieldFamily::COMMON_ZERO_TOLERANCE {
                return Err(Error::CommonZeroViolation { mode, norm });
            }
            Ok(f.jacobian(&zero))
        })
        .collect()
}

/// `Σ p_i F^i` as a field; its Jacobian is the same combination of Jacobians.
pub fn average_field(family: &SwitchedFieldFamily, weights: &ProbabilityVector) -> Result<Field> {
    if weights.len() != family.modes() {
        return Err(Error::DimensionMismatch {
            what: "averaging weights",
            expected: family.modes(),
            found: weights.len(),
        });
    }
    Ok(Arc::new(AverageField {
        fields: family.fields().to_vec(),
        weights: weights.as_slice().to_vec(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_field_jacobian_at_zero() {
        let a = SquareMatrix::from_rows(vec![vec![-1.0, 2.0], vec![0.5, -3.0]]).unwrap();
        let fam = SwitchedFieldFamily::new(
            vec![Arc::new(LinearField::new(a.clone()))],
            BoxDomain::unbounded(2),
        )
        .unwrap();
        assert_eq!(jacobian_at_zero(&fam).unwrap()[0], a);
    }

    #[test]
    fn finite_difference_fallback() {
        let f = FnField::new("quad", 2, |x, out| {
            out[0] = x[0] * x[1];
            out[1] = x[0] * x[0] - x[1];
        });
        let j = f.jacobian(&[0.5, 2.0]);
        let expect = [[2.0, 0.5], [1.0, -1.0]];
        for (i, row) in expect.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                assert!((j.get(i, k) - v).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn family_requires_common_zero() {
        let f: Field = Arc::new(FnField::new("shifted", 1, |x, out| out[0] = x[0] + 1.0));
        assert!(matches!(
            SwitchedFieldFamily::new(vec![f], BoxDomain::unbounded(1)),
            Err(Error::CommonZeroViolation { mode: 0, .. })
        ));
    }

    #[test]
    fn clamp_policy() {
        let dom = BoxDomain::unit_cube(2);
        let f = LinearField::new(SquareMatrix::zeros(2));
        let mut x = [-5e-10, 1.0 + 5e-10];
        dom.clamp(&mut x, &f).unwrap();
        assert_eq!(x, [0.0, 1.0]);
        let mut y = [-1e-6, 0.5];
        assert!(dom.clamp(&mut y, &f).is_err());
    }
}
