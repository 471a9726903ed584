//! Parameter ranges under which the potential-regularity laws apply.

use serde::{Deserialize, Serialize};

/// Parameters that passed [`check_admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleParams {
    pub hurst: f64,
    pub dim: usize,
    pub alpha: f64,
    pub beta_incr: Option<f64>,
}

impl AdmissibleParams {
    /// Temporal exponent `1 − H(d − α)`.
    pub fn time_exponent(&self) -> f64 {
        1.0 - self.hurst * (self.dim as f64 - self.alpha)
    }

    /// Supremum of admissible spatial increment exponents.
    pub fn max_beta_incr(&self) -> f64 {
        max_beta_incr(self.hurst, self.dim, self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
pub enum Rejection {
    #[error("H = {hurst} must lie in (0, 1) and d = {dim} must be at least 1")]
    Domain { hurst: f64, dim: usize },
    #[error("H d = {hd} < 1 requires 0 <= alpha < d = {dim}, got alpha = {alpha}")]
    AlphaRangeSubcritical { hd: f64, dim: usize, alpha: f64 },
    #[error("H d = {hd} >= 1 requires max(0, d - 1/H) = {lower} < alpha < d = {dim}, got alpha = {alpha}")]
    AlphaRangeCritical { hd: f64, lower: f64, dim: usize, alpha: f64 },
    #[error("beta_incr = {beta} must lie in [0, 1]")]
    BetaRange { beta: f64 },
    #[error("beta_incr - alpha < min(1, (1 - H d)/(2H), (1 - H d)/H) = {bound} fails for beta_incr = {beta}, alpha = {alpha}")]
    BetaIncrement { beta: f64, alpha: f64, bound: f64 },
}

impl Rejection {
    /// The violated condition as a formula.
    pub fn condition(&self) -> &'static str {
        match self {
            Self::Domain { .. } => "0 < H < 1, d >= 1",
            Self::AlphaRangeSubcritical { .. } => "0 <= alpha < d when H d < 1",
            Self::AlphaRangeCritical { .. } => "max(0, d - 1/H) < alpha < d",
            Self::BetaRange { .. } => "0 <= beta_incr <= 1",
            Self::BetaIncrement { .. } => "beta_incr - alpha < min(1, (1 - H d)/(2H), (1 - H d)/H)",
        }
    }
}

/// `min(1, (1 − Hd)/(2H), (1 − Hd)/H)`.
pub fn beta_gap(hurst: f64, dim: usize) -> f64 {
    let a = 1.0 - hurst * dim as f64;
    1.0f64.min(a / (2.0 * hurst)).min(a / hurst)
}

pub fn max_beta_incr(hurst: f64, dim: usize, alpha: f64) -> f64 {
    (alpha + beta_gap(hurst, dim)).min(1.0)
}

pub fn check_admissible(hurst: f64, dim: usize, alpha: f64, beta_incr: Option<f64>) -> Result<AdmissibleParams, Rejection> {
    if !(hurst > 0.0 && hurst < 1.0) || dim == 0 {
        return Err(Rejection::Domain { hurst, dim });
    }
    let d = dim as f64;
    let hd = hurst * d;
    if hd < 1.0 {
        if !(0.0..d).contains(&alpha) {
            return Err(Rejection::AlphaRangeSubcritical { hd, dim, alpha });
        }
    } else {
        let lower = (d - 1.0 / hurst).max(0.0);
        if !(alpha > lower && alpha < d) {
            return Err(Rejection::AlphaRangeCritical { hd, lower, dim, alpha });
        }
    }
    if let Some(beta) = beta_incr {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Rejection::BetaRange { beta });
        }
        let bound = beta_gap(hurst, dim);
        if !(beta - alpha < bound) {
            return Err(Rejection::BetaIncrement { beta, alpha, bound });
        }
    }
    Ok(AdmissibleParams { hurst, dim, alpha, beta_incr })
}
