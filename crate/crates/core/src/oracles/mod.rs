//! Exact and Monte Carlo checks of the analytic bounds behind the regularity
//! laws: characteristic-function decay, local nondeterminism, moment and tail
//! bounds, and two closed-form identities.

pub mod analytic;
pub mod gaussian;
pub mod moments;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use analytic::{maximum_principle_check, maximum_principle_ratio, psi_gamma, simplex_beta_integral, zeta_for};
pub use gaussian::{
    assumption_i_sweep, gaussian_charfun_exact, lnd_constant_estimate, a_priori_c0, CovarianceModel, LndEstimate,
    SweepConfig,
};
pub use moments::{moment_bound_check, normalized_moments, tail_bound_check, MomentRoute, TailOptions};

/// Outcome of a bound check. `worst_ratio` is lhs/rhs at the witnessing
/// configuration; a passing report has `worst_ratio ≤ 1` and no violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub n_configs: usize,
    pub worst_ratio: f64,
    pub violations: usize,
    /// Configuration attaining `worst_ratio`, embedded for replay.
    pub witness: serde_json::Value,
    /// Inferred constants (`c0`, `c1`, slopes, ...).
    pub constants: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub(crate) fn new(check: &str) -> Self {
        Self {
            check: check.into(),
            n_configs: 0,
            worst_ratio: 0.0,
            violations: 0,
            witness: serde_json::Value::Null,
            constants: BTreeMap::new(),
            notes: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.worst_ratio <= 1.0
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
