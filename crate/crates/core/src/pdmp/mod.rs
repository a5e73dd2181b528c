//! Simulation of the switched process `Z = (X, I)`: RK4 flow between jumps,
//! exponential or thinned jump clocks, and the autonomous mode chain.

mod chain;
pub mod ode;
pub mod rng;
mod simulate;
mod system;
mod trajectory;

pub use chain::{simulate_mode_chain, ModePath};
pub use ode::{integrate_flow, Rk4};
pub use simulate::{
    simulate, simulate_replicate, simulate_synchronous_pair, simulate_until, synchronous_pair_replicate,
    IntegratorConfig,
};
pub use system::{FnRates, RateFunction, Rates, SwitchedSystem};
pub use trajectory::{Jump, Trajectory};
pub(crate) use trajectory::fmt_f64;
