//! Vector fields with a common zero, epidemic (Lajmanovich-Yorke) fields,
//! axiom audits and equilibria.

mod epidemic;
mod equilibrium;
mod field;
mod ly;

pub use epidemic::{check_epidemic, Axiom, AxiomCheck, EpidemicReport, Violation};
pub use equilibrium::endemic_equilibrium;
pub use field::{
    average_field, finite_difference_jacobian, jacobian_at_zero, AverageField, BoxDomain, Field,
    FnField, LinearField, SwitchedFieldFamily, VectorField,
};
pub use ly::LajmanovichYorke;
