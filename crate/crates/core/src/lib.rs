//! Randomly switched vector fields with a common zero.
//!
//! The crate simulates piecewise-deterministic Markov processes `Z = (X, I)`
//! in which a continuous state `X` follows the vector field selected by a
//! jump process `I`, estimates the top Lyapunov exponent of the linearized
//! switching system at the common zero, and runs persistence / extinction
//! diagnostics on simulated trajectories.
//!
//! Module map:
//!
//! * [`matrixcore`]: dense spectra, Metzler/Perron machinery, cone metrics,
//!   analytic growth-rate bounds.
//! * [`vectorfields`]: vector fields, Lajmanovich-Yorke epidemic fields,
//!   axiom audits, equilibria.
//! * [`pdmp`]: the switching simulator (RK4 flow, exponential clocks, thinning).
//! * [`lyapunov`]: angular process and the two top-exponent estimators.
//! * [`persistence`]: occupation measures, extinction slopes, hitting times,
//!   part-metric contraction.
//! * [`experiments`]: the built-in scenario registry, runner and verification suite.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod lyapunov;
pub mod matrixcore;
pub mod parallel;
pub mod pdmp;
pub mod persistence;
pub mod stats;
pub mod vectorfields;

pub use error::{Error, Result};
