use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{ConeTag, LinearSwitchedSystem};
use crate::matrixcore::{is_metzler, RateMatrix, SquareMatrix};
use crate::pdmp::SwitchedSystem;
use crate::vectorfields::{BoxDomain, Field, LajmanovichYorke, LinearField, SwitchedFieldFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Lajmanovich-Yorke fields on the unit cube, one per mode.
    LajmanovichYorke { fields: Vec<LajmanovichYorke> },
    /// Linear fields `x ↦ Aⁱx` on `ℝ^d`.
    Linear { matrices: Vec<SquareMatrix> },
}

impl SystemSpec {
    pub fn dim(&self) -> usize {
        match self {
            SystemSpec::LajmanovichYorke { fields } => fields.first().map_or(0, |f| f.cure().len()),
            SystemSpec::Linear { matrices } => matrices.first().map_or(0, SquareMatrix::dim),
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            SystemSpec::LajmanovichYorke { fields } => fields.len(),
            SystemSpec::Linear { matrices } => matrices.len(),
        }
    }

    /// `Aⁱ = DFⁱ(0)`.
    pub fn linearization(&self) -> Vec<SquareMatrix> {
        match self {
            SystemSpec::LajmanovichYorke { fields } => {
                fields.iter().map(LajmanovichYorke::linearization).collect()
            }
            SystemSpec::Linear { matrices } => matrices.clone(),
        }
    }

    pub fn family(&self) -> Result<SwitchedFieldFamily> {
        match self {
            SystemSpec::LajmanovichYorke { fields } => {
                let d = self.dim();
                let fs: Vec<Field> = fields
                    .iter()
                    .map(|f| std::sync::Arc::new(f.clone()) as Field)
                    .collect();
                SwitchedFieldFamily::new(fs, BoxDomain::unit_cube(d))
            }
            SystemSpec::Linear { matrices } => {
                let d = self.dim();
                let fs: Vec<Field> = matrices
                    .iter()
                    .map(|m| std::sync::Arc::new(LinearField::new(m.clone())) as Field)
                    .collect();
                SwitchedFieldFamily::new(fs, BoxDomain::unbounded(d))
            }
        }
    }

    pub fn is_epidemic(&self) -> bool {
        matches!(self, SystemSpec::LajmanovichYorke { .. })
    }
}

/// Base rate matrix times a multiplier `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesSpec {
    pub base: RateMatrix,
    pub beta: f64,
}

impl RatesSpec {
    pub fn matrix(&self) -> Result<RateMatrix> {
        self.base.scaled(self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// Spectral abscissae of each `Aⁱ` and of `A^p`.
    Eigenvalues,
    /// Endemic equilibrium of the averaged field.
    Equilibrium,
    /// Hurwitz scan of the convex hull of the `Aⁱ`.
    HullCheck,
    /// Monodromy growth of the period-1 switching schedule.
    PeriodSwitch,
    /// Angular and log-norm estimates of `λ₁` plus analytic bounds.
    Lyapunov,
    /// `λ₁(β)` curve over `sweep_betas`.
    Sweep,
    /// Sample trajectories exported as CSV.
    Trajectories,
    /// Trailing-window slopes of `log ‖X_t‖`.
    Extinction,
    /// Occupation measure and mass near the extinction set.
    Occupation,
    /// Time averages of `‖X_t‖^{−θ}`.
    TailMoment,
    /// First passage times above `ε`.
    HittingTimes,
    /// Synchronous-coupling part-metric decay.
    PartMetric,
    /// Trailing-window slopes of `log ‖X_t − x*‖`.
    Convergence,
}

/// Where an expected band comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Provenance {
    Paper,
    Derived,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Positive,
}

/// One expected band checked by [`crate::experiments::run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Expectation {
    /// `λ(Aⁱ) = value ± tol`.
    ModeAbscissa { mode: usize, value: f64, tol: f64 },
    /// `λ(A^p) = value ± tol`.
    AverageAbscissa { value: f64, tol: f64 },
    /// Endemic equilibrium of the averaged field within `tol` (max norm).
    EndemicEquilibrium { point: Vec<f64>, tol: f64 },
    /// Every field vanishes exactly at `point`.
    CommonEquilibrium { point: Vec<f64> },
    /// Hull scan verdict, optionally with the worst abscissa.
    Hull {
        all_hurwitz: bool,
        worst_lambda: Option<f64>,
        tol: f64,
    },
    /// Period-switch monodromy spectral radius exceeds one.
    PeriodSwitchExplodes { period: f64 },
    /// `λ̂₁` has this sign with zero outside `±3σ`.
    LambdaSign { sign: Sign },
    /// Every trailing slope of `log ‖X_t‖` is negative.
    ExtinctionSlopesNegative,
    /// Normalized occupation mass in `B(0, radius)` is below `max`.
    BallMassBelow { radius: f64, max: f64 },
    /// Normalized occupation mass in `B(0, radius)` is above `min`.
    BallMassAbove { radius: f64, min: f64 },
    /// No hitting time is censored at the horizon.
    NoCensoredHits,
    /// Coupled copies end closer than they start, never separate, and the
    /// log mean distance decays.
    PartMetricContracts,
    /// Every trailing slope of `log ‖X_t − target‖` is negative.
    ConvergesTo { target: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedBand {
    #[serde(flatten)]
    pub expectation: Expectation,
    pub provenance: Provenance,
    /// Short pointer to the claim the band encodes.
    #[serde(default)]
    pub source: String,
}

fn default_step() -> f64 {
    1e-3
}

fn default_lyapunov_step() -> f64 {
    1e-2
}

fn default_lyapunov_horizon() -> f64 {
    1e3
}

fn default_lyapunov_replicates() -> usize {
    1000
}

fn default_window() -> f64 {
    0.5
}

/// Settings of the linear-system estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSettings {
    #[serde(default = "default_lyapunov_horizon")]
    pub horizon: f64,
    #[serde(default = "default_lyapunov_replicates")]
    pub replicates: usize,
    #[serde(default = "default_lyapunov_step")]
    pub step: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        Self {
            horizon: default_lyapunov_horizon(),
            replicates: default_lyapunov_replicates(),
            step: default_lyapunov_step(),
        }
    }
}

/// First-passage experiment from states near the extinction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSettings {
    pub epsilon: f64,
    pub starts: Vec<Vec<f64>>,
    pub replicates: usize,
    pub horizon: f64,
}

/// Synchronous-coupling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSettings {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub replicates: usize,
    pub horizon: f64,
    /// Number of intervals of the reporting grid.
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    200
}

fn default_burn_in() -> f64 {
    0.1
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub system: SystemSpec,
    pub rates: RatesSpec,
    /// Initial states; replicates cycle through them.
    pub initial_conditions: Vec<Vec<f64>>,
    #[serde(default)]
    pub initial_mode: usize,
    pub horizon: f64,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub lyapunov: LyapunovSettings,
    #[serde(default)]
    pub sweep_betas: Vec<f64>,
    /// Trailing fraction of the horizon used by slope fits.
    #[serde(default = "default_window")]
    pub fit_window: f64,
    /// Leading fraction of the horizon left out of occupation measures.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
    #[serde(default)]
    pub hitting: Option<HittingSettings>,
    #[serde(default)]
    pub coupling: Option<CouplingSettings>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub expectations: Vec<ExpectedBand>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.system.dim();
        let modes = self.system.modes();
        if d == 0 || modes == 0 {
            return Err(Error::Config("system needs at least one field of positive dimension".into()));
        }
        if self.rates.base.modes() != modes {
            return Err(Error::Config(format!(
                "rate matrix has {} modes, system has {modes}",
                self.rates.base.modes()
            )));
        }
        if !(self.rates.beta > 0.0) {
            return Err(Error::Config(format!("beta {} must be positive", self.rates.beta)));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.lyapunov.replicates == 0 {
            return Err(Error::Config("lyapunov replicates must be at least 1".into()));
        }
        if !(self.horizon > 0.0) || !(self.lyapunov.horizon > 0.0) {
            return Err(Error::Config("horizons must be positive".into()));
        }
        if !(self.step > 0.0) || !(self.lyapunov.step > 0.0) {
            return Err(Error::Config("integration steps must be positive".into()));
        }
        if !(self.fit_window > 0.0 && self.fit_window <= 1.0) {
            return Err(Error::Config("fit window must be in (0, 1]".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return Err(Error::Config("burn-in fraction must be in [0, 1)".into()));
        }
        if self.diagnostics.contains(&Diagnostic::HittingTimes) && self.hitting.is_none() {
            return Err(Error::Config("hitting_times diagnostic needs hitting settings".into()));
        }
        if self.diagnostics.contains(&Diagnostic::PartMetric) && self.coupling.is_none() {
            return Err(Error::Config("part_metric diagnostic needs coupling settings".into()));
        }
        if let Some(h) = &self.hitting {
            if !(h.epsilon > 0.0) || h.replicates == 0 || !(h.horizon > 0.0) || h.starts.is_empty() {
                return Err(Error::Config("hitting settings need epsilon > 0, starts, replicates and a horizon".into()));
            }
            if h.starts.iter().any(|x| x.len() != d) {
                return Err(Error::Config("hitting start has wrong dimension".into()));
            }
        }
        if let Some(c) = &self.coupling {
            if c.replicates == 0 || !(c.horizon > 0.0) || c.points == 0 {
                return Err(Error::Config("coupling settings need replicates, points and a horizon".into()));
            }
            if c.x0.len() != d || c.y0.len() != d {
                return Err(Error::Config("coupling states have wrong dimension".into()));
            }
            if !self.system.is_epidemic() {
                return Err(Error::Config("part-metric coupling needs an epidemic system".into()));
            }
        }
        if self.initial_conditions.is_empty() {
            return Err(Error::Config("at least one initial condition is required".into()));
        }
        if self.initial_mode >= modes {
            return Err(Error::Config(format!("initial mode {} out of range", self.initial_mode)));
        }
        for x in &self.initial_conditions {
            if x.len() != d {
                return Err(Error::Config(format!("initial condition {x:?} has wrong dimension")));
            }
        }
        if self.sweep_betas.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Config("sweep betas must be positive".into()));
        }
        if self.diagnostics.contains(&Diagnostic::Sweep) && self.sweep_betas.is_empty() {
            return Err(Error::Config("sweep diagnostic needs sweep_betas".into()));
        }
        self.rates.matrix()?.ensure_irreducible()?;
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        let mut s = self.clone();
        s.rates.beta = beta;
        s
    }

    pub fn switched_system(&self) -> Result<SwitchedSystem> {
        SwitchedSystem::constant(self.system.family()?, self.rates.matrix()?)
    }

    /// Linearization at the origin; orthant cone when every `Aⁱ` is Metzler.
    pub fn linear_system(&self) -> Result<LinearSwitchedSystem> {
        let mats = self.system.linearization();
        let cone = if mats.iter().all(is_metzler) {
            ConeTag::Orthant
        } else {
            ConeTag::FullSpace
        };
        LinearSwitchedSystem::new(mats, self.rates.matrix()?, cone)
    }
}
