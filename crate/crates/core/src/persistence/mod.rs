//! Diagnostics on simulated paths: occupation measures and their mass near
//! the extinction set, tail moments, extinction and convergence rates,
//! hitting times, and part-metric contraction of coupled copies.

mod contraction;
mod hitting;
mod occupation;
mod rates;

pub use contraction::{part_metric_contraction, DecayCurve, CURVE_FLOOR, NONEXPANSIVE_SLACK};
pub use hitting::{hitting_times, GeometricMoment, HittingTimeSample, GEOMETRIC_BASES};
pub use occupation::{
    ball_mass, default_cells, occupation_measure, occupation_measure_after, OccupationHistogram,
};
pub use rates::{
    convergence_rate, extinction_rate, log_distance_fit, tail_moment, tail_moment_sweep,
    tail_moment_until, ExtinctionFit, TailMoment, DISTANCE_FLOOR, NORM_FLOOR, TAIL_THETAS,
};
