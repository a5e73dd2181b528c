use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{stationary_distribution, ProbabilityVector, RateMatrix, SquareMatrix};
use crate::pdmp::{Rates, SwitchedSystem};
use crate::vectorfields::jacobian_at_zero;

/// Cone in which the angular process lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeTag {
    FullSpace,
    /// Nonnegative orthant; requires every matrix to be Metzler.
    Orthant,
}

/// `Ẏ = A^{J_t} Y` with `J` the constant-rate mode chain.
#[derive(Debug, Clone)]
pub struct LinearSwitchedSystem {
    matrices: Vec<SquareMatrix>,
    rates: RateMatrix,
    cone: ConeTag,
    stationary: ProbabilityVector,
}

impl LinearSwitchedSystem {
    pub fn new(matrices: Vec<SquareMatrix>, rates: RateMatrix, cone: ConeTag) -> Result<Self> {
        let d = matrices
            .first()
            .ok_or_else(|| Error::Domain("empty matrix family".into()))?
            .dim();
        if let Some(m) = matrices.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                what: "linear family",
                expected: d,
                found: m.dim(),
            });
        }
        if rates.modes() != matrices.len() {
            return Err(Error::DimensionMismatch {
                what: "rate modes vs matrices",
                expected: matrices.len(),
                found: rates.modes(),
            });
        }
        if cone == ConeTag::Orthant {
            if let Some(m) = matrices.iter().find(|m| !crate::matrixcore::is_metzler(m)) {
                return Err(Error::Precondition(format!(
                    "orthant cone needs Metzler matrices; {m} is not"
                )));
            }
        }
        let stationary = stationary_distribution(&rates)?;
        Ok(Self {
            matrices,
            rates,
            cone,
            stationary,
        })
    }

    /// Linearization at the common zero: `Aⁱ = DFⁱ(0)`, rates frozen at 0.
    /// The orthant tag is chosen when every `Aⁱ` is Metzler.
    pub fn linearize(system: &SwitchedSystem) -> Result<Self> {
        let matrices = jacobian_at_zero(system.family())?;
        let rates = match system.rates() {
            Rates::Constant(q) => q.clone(),
            Rates::StateDependent(r) => r.matrix_at(&vec![0.0; system.dim()])?,
        };
        let cone = if matrices.iter().all(crate::matrixcore::is_metzler) {
            ConeTag::Orthant
        } else {
            ConeTag::FullSpace
        };
        Self::new(matrices, rates, cone)
    }

    pub fn single(matrix: SquareMatrix, cone: ConeTag) -> Result<Self> {
        Self::new(vec![matrix], RateMatrix::single(), cone)
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn modes(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[SquareMatrix] {
        &self.matrices
    }

    pub fn rates(&self) -> &RateMatrix {
        &self.rates
    }

    pub fn cone(&self) -> ConeTag {
        self.cone
    }

    /// Stationary law `p` of the mode chain.
    pub fn stationary(&self) -> &ProbabilityVector {
        &self.stationary
    }

    /// `A^p = Σ p_i Aⁱ`.
    pub fn averaged_matrix(&self) -> SquareMatrix {
        SquareMatrix::combination(&self.matrices, self.stationary.as_slice())
            .expect("validated family")
    }

    pub fn with_rates(&self, rates: RateMatrix) -> Result<Self> {
        Self::new(self.matrices.clone(), rates, self.cone)
    }
}
