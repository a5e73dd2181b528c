//! Top Lyapunov exponent of the linearized switching system: the angular
//! process, two independent Monte-Carlo estimators, analytic bounds and the
//! fast-switching limit.
//!
//! Both estimators target `Λ⁺`, the largest average growth rate; for
//! Metzler families and scalar systems it coincides with `Λ⁻` and the top
//! exponent `λ₁`, which covers every built-in scenario.

mod analytic;
mod angular;
mod estimate;
mod system;

pub use analytic::{
    analytic_bounds, averaged_limit, hurwitz_hull_check, period_switch_growth, AnalyticBounds,
    HullCheck,
};
pub use angular::{angular_drift, random_direction, simulate_angular, AngularTrajectory};
pub use estimate::{
    estimate_lambda_angular, estimate_lambda_lognorm, lambda_beta_sweep, write_sweep_csv,
    EstimatorKind, EstimatorOptions, GrowthRateEstimate, SweepPoint,
};
pub use system::{ConeTag, LinearSwitchedSystem};
