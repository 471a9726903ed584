//! Sampling of rough stochastic paths, Riesz potentials of their occupation
//! measures, and Monte Carlo checks of the resulting regularity laws.

pub mod error;
pub mod limits;
pub mod occupation;
pub mod oracles;
pub mod par;
pub mod process_sim;
pub mod quad;
pub mod regularity;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use process_sim::{ProcessKind, ProcessSpec, Sampler, SamplePath};
