//! Dense linear algebra and positive-cone geometry.

mod bounds;
mod cone;
mod matrix;
mod spectral;

pub use bounds::{growth_rate_bounds, mierczynski_bound_2d, trace_lower_bound, OffDiagonalTerm};
pub use cone::{birkhoff_contraction, hilbert_metric, part_metric};
pub use matrix::{ProbabilityVector, RateMatrix, SquareMatrix};
pub use spectral::{
    balance_residual, eigenvalues, expm, is_hurwitz, is_irreducible, is_metzler, perron_vector,
    spectral_abscissa, spectral_radius, stationary_distribution, symmetric_extremes,
};
