//! Sampling audit of the epidemic axioms E1–E5 on the unit cube.
//!
//! A passing axiom means "no violation found among the samples"; sampling
//! cannot prove any of them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::VectorField;
use crate::matrixcore::SquareMatrix;

const TOLERANCE: f64 = 1e-9;
const STRICT_MARGIN: f64 = 1e-12;
const SUBHOMOGENEITY_FACTORS: [f64; 3] = [1.1, 1.5, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axiom {
    /// `F(0) = 0`.
    E1,
    /// `F_i(x) < 0` on the face `x_i = 1`.
    E2,
    /// Cooperative: `DF(x)` Metzler.
    E3,
    /// `DF(x)` irreducible on `[0, 1)^d`.
    E4,
    /// Strongly subhomogeneous: `F(λx) ≪ λF(x)` for `λ > 1`.
    E5,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    /// How far past the tolerance the worst sample went.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub passed: bool,
    pub samples: usize,
    pub worst: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicReport {
    pub checks: Vec<AxiomCheck>,
}

impl EpidemicReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: Axiom) -> &AxiomCheck {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is audited")
    }
}

struct Tracker {
    axiom: Axiom,
    samples: usize,
    worst: Option<Violation>,
}

impl Tracker {
    fn new(axiom: Axiom) -> Self {
        Self {
            axiom,
            samples: 0,
            worst: None,
        }
    }

    /// `excess > 0` is a violation.
    fn record(&mut self, point: &[f64], excess: f64) {
        self.samples += 1;
        if excess > 0.0 && self.worst.as_ref().is_none_or(|w| excess > w.magnitude) {
            self.worst = Some(Violation {
                point: point.to_vec(),
                magnitude: excess,
            });
        }
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom,
            passed: self.worst.is_none(),
            samples: self.samples,
            worst: self.worst,
        }
    }
}

/// Largest negative off-diagonal entry magnitude (0 when Metzler).
fn metzler_excess(j: &SquareMatrix) -> f64 {
    let d = j.dim();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for k in 0..d {
            if i != k {
                worst = worst.max(-j.get(i, k));
            }
        }
    }
    worst
}

/// Irreducibility with edges where the entry exceeds the audit tolerance.
fn thresholded_irreducible(j: &SquareMatrix) -> bool {
    let d = j.dim();
    let mut filtered = SquareMatrix::zeros(d);
    for i in 0..d {
        for k in 0..d {
            if i != k && j.get(i, k).abs() > TOLERANCE {
                filtered.set(i, k, 1.0);
            }
        }
    }
    crate::matrixcore::is_irreducible(&filtered)
}

/// Audits E1–E5 for `field` on `[0, 1]^d` with `samples` random points per
/// axiom (faces are sampled for E2, the half-open cube for E4, and the open
/// cube scaled so that `λx` stays inside for E5).
pub fn check_epidemic<V: VectorField + ?Sized>(field: &V, samples: usize, seed: u64) -> EpidemicReport {
    let d = field.dim();
    let samples = samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; d];

    let mut e1 = Tracker::new(Axiom::E1);
    let zero = vec![0.0; d];
    field.eval_into(&zero, &mut out);
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1.record(&zero, norm - TOLERANCE);

    let mut e2 = Tracker::new(Axiom::E2);
    let mut e3 = Tracker::new(Axiom::E3);
    let mut e4 = Tracker::new(Axiom::E4);
    let mut e5 = Tracker::new(Axiom::E5);
    let mut scaled = vec![0.0; d];
    let mut at_scaled = vec![0.0; d];

    for s in 0..samples {
        // E2 on a random face.
        let face = s % d;
        let mut x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        x[face] = 1.0;
        field.eval_into(&x, &mut out);
        e2.record(&x, out[face] + TOLERANCE);

        // E3 on the closed cube, E4 on [0, 1)^d.
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let j = field.jacobian(&x);
        e3.record(&x, metzler_excess(&j) - TOLERANCE);
        e4.record(&x, if thresholded_irreducible(&j) { 0.0 } else { 1.0 });

        // E5: λF(x) − F(λx) must exceed the strict margin in every coordinate.
        let lambda = SUBHOMOGENEITY_FACTORS[s % SUBHOMOGENEITY_FACTORS.len()];
        let x: Vec<f64> = (0..d)
            .map(|_| rng.random_range(f64::EPSILON..1.0) / lambda)
            .collect();
        for (y, v) in scaled.iter_mut().zip(&x) {
            *y = lambda * v;
        }
        field.eval_into(&x, &mut out);
        field.eval_into(&scaled, &mut at_scaled);
        let gap = out
            .iter()
            .zip(&at_scaled)
            .map(|(f, g)| lambda * f - g)
            .fold(f64::INFINITY, f64::min);
        e5.record(&x, STRICT_MARGIN - gap);
    }

    EpidemicReport {
        checks: vec![e1.finish(), e2.finish(), e3.finish(), e4.finish(), e5.finish()],
    }
}
