//! Occupation measures of sampled paths and their Riesz potentials.

pub mod admissible;
pub mod histogram;
pub mod measure;
pub mod potential;
pub mod sup;

pub use admissible::{check_admissible, AdmissibleParams, Rejection};
pub use histogram::{default_bin_width, local_time_at, local_time_histogram, LocalTimeHistogram};
pub use measure::{occupation_measure, DistanceProfile, OccupationMeasure};
pub use potential::{
    potential_with, rescaled_potential, rescaling_factor, riesz_potential, unit_ball_volume, write_potential_csv,
    AtomKernel, BallModel, PotentialEstimate,
};
pub use sup::{sup_potential_at_sites, sup_potential_over_space, SupPotential, DEFAULT_MAX_SITES};
