use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `d × d` real matrix, row-major.
///
/// Serialized as a JSON array of rows.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Domain("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "matrix entries",
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            data[i * dim + i] = v;
        }
        Self::from_row_major(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut t = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                t.data[j * d + i] = self.data[i * d + j];
            }
        }
        t
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let d = self.dim;
        let mut s = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                s.data[i * d + j] = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &SquareMatrix) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    /// Convex (or any linear) combination `Σ wᵢ Mᵢ`.
    pub fn combination(matrices: &[SquareMatrix], weights: &[f64]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Domain("empty matrix family".into()))?;
        if matrices.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "combination weights",
                expected: matrices.len(),
                found: weights.len(),
            });
        }
        let d = first.dim;
        let mut out = Self::zeros(d);
        for (m, &w) in matrices.iter().zip(weights) {
            if m.dim != d {
                return Err(Error::DimensionMismatch {
                    what: "matrix family",
                    expected: d,
                    found: m.dim,
                });
            }
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += w * v;
            }
        }
        Ok(out)
    }

    /// `out = A x`. Hot path: no allocation.
    #[inline]
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let row = &self.data[i * d..(i + 1) * d];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn matmul(&self, other: &SquareMatrix) -> Self {
        let d = self.dim;
        assert_eq!(d, other.dim, "matrix dimension mismatch");
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                what: "square matrix",
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let d = m.nrows();
        let mut data = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
        Self::from_row_major(d, data)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        m.rows()
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

impl fmt::Display for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// Jump intensities `a_ij` between modes: nonnegative off the diagonal,
/// exactly zero on it.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RateMatrix(SquareMatrix);

impl RateMatrix {
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let n = m.dim();
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(Error::InvalidRates(format!(
                    "diagonal entry ({i},{i}) = {} must be zero",
                    m.get(i, i)
                )));
            }
            for j in 0..n {
                if i != j && m.get(i, j) < 0.0 {
                    return Err(Error::InvalidRates(format!(
                        "entry ({i},{j}) = {} is negative",
                        m.get(i, j)
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    /// Two modes with `a_01 = a_10 = beta`.
    pub fn symmetric_pair(beta: f64) -> Result<Self> {
        Self::from_rows(vec![vec![0.0, beta], vec![beta, 0.0]])
    }

    /// Every pair of distinct modes joined at rate `beta`.
    pub fn uniform(modes: usize, beta: f64) -> Result<Self> {
        let rows = (0..modes)
            .map(|i| (0..modes).map(|j| if i == j { 0.0 } else { beta }).collect())
            .collect();
        Self::from_rows(rows)
    }

    /// The single-mode (jumpless) rate matrix.
    pub fn single() -> Self {
        Self(SquareMatrix::zeros(1))
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    /// Total exit rate `Σ_j a_ij`.
    #[inline]
    pub fn exit_rate(&self, i: usize) -> f64 {
        let n = self.modes();
        self.0.as_slice()[i * n..(i + 1) * n].iter().sum()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.modes())
            .map(|i| self.exit_rate(i))
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("rate multiplier {beta} must be positive")));
        }
        Ok(Self(self.0.scaled(beta)))
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    /// `None` when strongly connected, else a pair `(from, to)` with `to`
    /// unreachable from `from`.
    pub fn non_communicating_pair(&self) -> Option<(usize, usize)> {
        super::spectral::unreachable_pair(&self.0)
    }

    pub fn ensure_irreducible(&self) -> Result<()> {
        match self.non_communicating_pair() {
            None => Ok(()),
            Some((from, to)) => Err(Error::Reducible { from, to }),
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for RateMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<RateMatrix> for Vec<Vec<f64>> {
    fn from(m: RateMatrix) -> Self {
        m.0.rows()
    }
}

impl fmt::Debug for RateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RateMatrix({:?})", self.0.rows())
    }
}

/// Nonnegative weights summing to one (within `1e-12`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("probability vector is empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain(format!(
                "probability weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::Domain(format!(
                "probability weights sum to {total}, not 1"
            )));
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Point mass on `i` among `n` outcomes.
    pub fn indicator(n: usize, i: usize) -> Self {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}
