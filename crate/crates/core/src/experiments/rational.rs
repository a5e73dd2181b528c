//! Exact rational constants for the built-in scenarios, converted to `f64`
//! once at registry construction.

use crate::matrixcore::SquareMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

pub const fn q(num: i64, den: i64) -> Rational {
    Rational { num, den }
}

pub const fn int(n: i64) -> Rational {
    Rational { num: n, den: 1 }
}

impl Rational {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

pub fn vector<const N: usize>(v: [Rational; N]) -> Vec<f64> {
    v.iter().map(|r| r.to_f64()).collect()
}

pub fn matrix<const N: usize>(rows: [[Rational; N]; N]) -> SquareMatrix {
    SquareMatrix::from_rows(rows.iter().map(|r| vector(*r)).collect())
        .expect("built-in constants are finite and square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_are_exact_for_dyadics() {
        assert_eq!(q(65, 32).to_f64(), 2.03125);
        assert_eq!(q(1, 16).to_f64(), 0.0625);
        assert_eq!(q(33, 113).to_f64(), 33.0 / 113.0);
    }
}
