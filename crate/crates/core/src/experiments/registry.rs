//! Built-in scenarios with their exact constants.

use super::rational::{int, matrix, q, vector};
use super::scenario::{
    CouplingSettings, Diagnostic, ExpectedBand, Expectation, HittingSettings, LyapunovSettings, Provenance, RatesSpec, Scenario, Sign,
    SystemSpec,
};
use crate::error::{Error, Result};
use crate::matrixcore::{RateMatrix, SquareMatrix};
use crate::vectorfields::LajmanovichYorke;

pub const NAMES: [&str; 5] = ["ainscosta", "astacoins", "fmg3d", "ly3d", "nobra"];

/// Spectral radius of `e^{A¹}e^{A⁰}` for the 3-d linear pair, computed once
/// with an independent matrix-exponential routine and frozen here.
pub const FMG3D_PERIOD_ONE_RADIUS: f64 = 1.668_794_148_625_209_6;

fn band(expectation: Expectation, provenance: Provenance, source: &str) -> ExpectedBand {
    ExpectedBand {
        expectation,
        provenance,
        source: source.to_string(),
    }
}

fn ly(c: SquareMatrix, d: Vec<f64>) -> LajmanovichYorke {
    LajmanovichYorke::new(c, d).expect("built-in epidemic constants are valid")
}

fn pair_rates(beta: f64) -> RatesSpec {
    RatesSpec {
        base: RateMatrix::symmetric_pair(1.0).expect("unit rates are valid"),
        beta,
    }
}

pub fn ainscosta_fields() -> Vec<LajmanovichYorke> {
    vec![
        ly(matrix([[int(2), int(1)], [int(1), int(1)]]), vector([int(6), int(1)])),
        ly(matrix([[int(1), int(1)], [int(1), int(3)]]), vector([int(1), int(7)])),
    ]
}

pub fn astacoins_fields() -> Vec<LajmanovichYorke> {
    vec![
        ly(matrix([[int(1), int(4)], [q(1, 16), int(1)]]), vector([int(2), int(2)])),
        ly(matrix([[int(2), q(1, 16)], [int(4), int(2)]]), vector([int(3), int(3)])),
    ]
}

pub fn fmg3d_matrices() -> Vec<SquareMatrix> {
    vec![
        matrix([
            [int(-1), int(0), int(0)],
            [int(10), int(-1), int(0)],
            [int(0), int(0), int(-10)],
        ]),
        matrix([
            [int(-10), int(0), int(10)],
            [int(0), int(-10), int(0)],
            [int(0), int(10), int(-1)],
        ]),
    ]
}

pub fn ly3d_fields() -> Vec<LajmanovichYorke> {
    let cures = [vector([int(11), int(11), int(20)]), vector([int(20), int(20), int(11)])];
    fmg3d_matrices()
        .iter()
        .zip(cures)
        .map(|(a, d)| {
            let c = a.add_scaled(1.0, &SquareMatrix::diagonal(&d).expect("finite cures"));
            ly(c, d)
        })
        .collect()
}

pub fn nobra_fields() -> Vec<LajmanovichYorke> {
    vec![
        ly(matrix([[int(1), int(3)], [int(2), int(4)]]), vector([int(2), int(3)])),
        ly(matrix([[int(6), int(2)], [int(7), int(3)]]), vector([int(4), int(5)])),
    ]
}

fn ainscosta() -> Scenario {
    let sqrt5m2 = 5f64.sqrt() - 2.0;
    Scenario {
        name: "ainscosta".into(),
        description: "Two persistent epidemics whose fast switching drives the infection to extinction."
            .into(),
        system: SystemSpec::LajmanovichYorke { fields: ainscosta_fields() },
        rates: pair_rates(20.0),
        initial_conditions: vec![vec![0.5, 0.5]],
        initial_mode: 0,
        horizon: 1e3,
        replicates: 20,
        seed: 41,
        step: 1e-3,
        lyapunov: LyapunovSettings::default(),
        sweep_betas: vec![],
        fit_window: 0.5,
        burn_in: 0.1,
        hitting: None,
        coupling: None,
        diagnostics: vec![
            Diagnostic::Eigenvalues,
            Diagnostic::Lyapunov,
            Diagnostic::Trajectories,
            Diagnostic::Extinction,
            Diagnostic::Occupation,
            Diagnostic::TailMoment,
        ],
        expectations: vec![
            band(
                Expectation::ModeAbscissa { mode: 0, value: sqrt5m2, tol: 1e-9 },
                Provenance::Paper,
                "Example 4.1: lambda(A0) = sqrt(5) - 2",
            ),
            band(
                Expectation::ModeAbscissa { mode: 1, value: sqrt5m2, tol: 1e-9 },
                Provenance::Paper,
                "Example 4.1: lambda(A1) = sqrt(5) - 2",
            ),
            band(
                Expectation::AverageAbscissa { value: -1.0, tol: 1e-9 },
                Provenance::Paper,
                "Example 4.1: lambda of the averaged matrix is -1",
            ),
            band(
                Expectation::LambdaSign { sign: Sign::Negative },
                Provenance::Paper,
                "Example 4.1 via Theorem 4.3: lambda_1 < 0 at beta = 20",
            ),
            band(
                Expectation::ExtinctionSlopesNegative,
                Provenance::Paper,
                "Theorem 3.1: log-norm slopes negative on every seed",
            ),
            band(
                Expectation::BallMassAbove { radius: 0.02, min: 0.9 },
                Provenance::Derived,
                "Theorem 3.1 conclusion: occupation concentrates at 0",
            ),
        ],
    }
}

fn astacoins() -> Scenario {
    let xstar = vector([q(33, 113), q(33, 113)]);
    Scenario {
        name: "astacoins".into(),
        description: "Two extinct epidemics whose switching makes the infection persist.".into(),
        system: SystemSpec::LajmanovichYorke { fields: astacoins_fields() },
        rates: pair_rates(20.0),
        initial_conditions: vec![vec![0.5, 0.5]],
        initial_mode: 0,
        horizon: 1e3,
        replicates: 20,
        seed: 42,
        step: 1e-3,
        lyapunov: LyapunovSettings::default(),
        sweep_betas: vec![],
        fit_window: 0.5,
        burn_in: 0.1,
        hitting: Some(HittingSettings {
            epsilon: 0.05,
            starts: vec![vec![1e-3, 1e-3]],
            replicates: 1000,
            horizon: 1e3,
        }),
        coupling: Some(CouplingSettings {
            x0: vec![0.2, 0.7],
            y0: vec![0.6, 0.3],
            replicates: 50,
            horizon: 100.0,
            points: 200,
        }),
        diagnostics: vec![
            Diagnostic::Eigenvalues,
            Diagnostic::Equilibrium,
            Diagnostic::HullCheck,
            Diagnostic::Lyapunov,
            Diagnostic::Trajectories,
            Diagnostic::Occupation,
            Diagnostic::TailMoment,
            Diagnostic::HittingTimes,
            Diagnostic::PartMetric,
        ],
        expectations: vec![
            band(
                Expectation::ModeAbscissa { mode: 0, value: -0.5, tol: 1e-9 },
                Provenance::Paper,
                "Example 4.2: lambda(A0) = -1/2",
            ),
            band(
                Expectation::ModeAbscissa { mode: 1, value: -0.5, tol: 1e-9 },
                Provenance::Paper,
                "Example 4.2: lambda(A1) = -1/2",
            ),
            band(
                Expectation::AverageAbscissa { value: q(33, 32).to_f64(), tol: 1e-9 },
                Provenance::Paper,
                "Example 4.2: lambda of the averaged matrix is 33/32",
            ),
            band(
                Expectation::EndemicEquilibrium { point: xstar, tol: 1e-8 },
                Provenance::Paper,
                "Example 4.2: endemic equilibrium of the averaged field",
            ),
            band(
                Expectation::Hull {
                    all_hurwitz: false,
                    worst_lambda: Some(q(33, 32).to_f64()),
                    tol: 1e-9,
                },
                Provenance::Paper,
                "Example 4.2: the midpoint of the hull is not Hurwitz",
            ),
            band(
                Expectation::LambdaSign { sign: Sign::Positive },
                Provenance::Paper,
                "Example 4.2: lambda_1 > 0 at beta = 20",
            ),
            band(
                Expectation::BallMassBelow { radius: 0.02, max: 0.05 },
                Provenance::Paper,
                "Theorem 3.2: little occupation mass near 0",
            ),
            band(
                Expectation::NoCensoredHits,
                Provenance::Derived,
                "Theorem 3.2 (iii): hitting times of eps = 0.05 are finite",
            ),
            band(
                Expectation::PartMetricContracts,
                Provenance::Derived,
                "Lemma 6.1: synchronous copies contract in the part metric",
            ),
        ],
    }
}

fn fmg3d() -> Scenario {
    Scenario {
        name: "fmg3d".into(),
        description: "Two Hurwitz 3-d linear systems with a Hurwitz hull whose random switching explodes."
            .into(),
        system: SystemSpec::Linear { matrices: fmg3d_matrices() },
        rates: pair_rates(10.0),
        initial_conditions: vec![vec![1.0, 1.0, 1.0]],
        initial_mode: 0,
        horizon: 10.0,
        replicates: 20,
        seed: 43,
        step: 1e-3,
        lyapunov: LyapunovSettings::default(),
        sweep_betas: vec![1.0, 3.0, 10.0, 30.0, 100.0],
        fit_window: 0.5,
        burn_in: 0.1,
        hitting: None,
        coupling: None,
        diagnostics: vec![
            Diagnostic::Eigenvalues,
            Diagnostic::HullCheck,
            Diagnostic::PeriodSwitch,
            Diagnostic::Lyapunov,
            Diagnostic::Sweep,
        ],
        expectations: vec![
            band(
                Expectation::Hull { all_hurwitz: true, worst_lambda: None, tol: 0.0 },
                Provenance::Paper,
                "Remark 4.6: every convex combination is Hurwitz",
            ),
            band(
                Expectation::PeriodSwitchExplodes { period: 1.0 },
                Provenance::Paper,
                "Remark 4.6: periodic switching yields an explosion",
            ),
            band(
                Expectation::LambdaSign { sign: Sign::Positive },
                Provenance::Paper,
                "Remark 4.6 figure: lambda_1 > 0 at beta = 10",
            ),
        ],
    }
}

fn ly3d() -> Scenario {
    Scenario {
        name: "ly3d".into(),
        description: "3-d epidemic built on the exploding linear pair: each mode goes extinct, switching persists."
            .into(),
        system: SystemSpec::LajmanovichYorke { fields: ly3d_fields() },
        rates: pair_rates(10.0),
        initial_conditions: vec![vec![0.5, 0.5, 0.5]],
        initial_mode: 0,
        horizon: 1e3,
        replicates: 20,
        seed: 44,
        step: 1e-3,
        lyapunov: LyapunovSettings::default(),
        sweep_betas: vec![],
        fit_window: 0.5,
        burn_in: 0.1,
        hitting: None,
        coupling: None,
        diagnostics: vec![
            Diagnostic::Eigenvalues,
            Diagnostic::Lyapunov,
            Diagnostic::Trajectories,
            Diagnostic::Occupation,
        ],
        expectations: vec![band(
            Expectation::LambdaSign { sign: Sign::Positive },
            Provenance::Derived,
            "linearization at 0 is the exploding 3-d pair",
        )],
    }
}

fn nobra() -> Scenario {
    let xstar = vector([q(1, 2), q(1, 2)]);
    Scenario {
        name: "nobra".into(),
        description: "Two epidemics sharing the endemic equilibrium (1/2, 1/2).".into(),
        system: SystemSpec::LajmanovichYorke { fields: nobra_fields() },
        rates: pair_rates(1.0),
        initial_conditions: vec![vec![0.9, 0.2]],
        initial_mode: 0,
        horizon: 200.0,
        replicates: 20,
        seed: 45,
        step: 1e-3,
        lyapunov: LyapunovSettings::default(),
        sweep_betas: vec![],
        fit_window: 0.5,
        burn_in: 0.1,
        hitting: None,
        coupling: None,
        diagnostics: vec![
            Diagnostic::Eigenvalues,
            Diagnostic::Lyapunov,
            Diagnostic::Trajectories,
            Diagnostic::Convergence,
            Diagnostic::Occupation,
        ],
        expectations: vec![
            band(
                Expectation::CommonEquilibrium { point: xstar.clone() },
                Provenance::Paper,
                "Example 5.1: both fields vanish at (1/2, 1/2)",
            ),
            band(
                Expectation::ConvergesTo { target: xstar },
                Provenance::Paper,
                "Example 5.1: exponential convergence to the common equilibrium",
            ),
        ],
    }
}

/// The five built-in scenarios.
pub fn registry() -> Vec<Scenario> {
    vec![ainscosta(), astacoins(), fmg3d(), ly3d(), nobra()]
}

pub fn lookup(name: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::spectral_abscissa;

    #[test]
    fn every_builtin_validates() {
        for s in registry() {
            s.validate().unwrap();
            let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn ly3d_linearizes_to_the_linear_pair() {
        let lin = lookup("ly3d").unwrap().system.linearization();
        assert_eq!(lin, fmg3d_matrices());
    }

    #[test]
    fn astacoins_modes_are_stable() {
        for a in lookup("astacoins").unwrap().system.linearization() {
            assert!((spectral_abscissa(&a).unwrap() + 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(lookup("sir"), Err(Error::UnknownScenario(_))));
    }
}
