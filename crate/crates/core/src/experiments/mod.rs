//! Scenario registry, config-driven runs and machine-readable reports.

pub mod acceptance;
pub mod rational;
pub mod registry;
mod report;
mod run;
pub mod scenario;

pub use acceptance::{verify_all, CriterionOutcome, Suite, VerifySummary};
pub use registry::{lookup, registry, FMG3D_PERIOD_ONE_RADIUS, NAMES};
pub use report::{CheckResult, DiagnosticOutcome, Report, StepCounts};
pub use run::run;
pub use scenario::{
    CouplingSettings, Diagnostic, ExpectedBand, Expectation, HittingSettings, LyapunovSettings,
    Provenance, RatesSpec, Scenario, Sign, SystemSpec,
};
