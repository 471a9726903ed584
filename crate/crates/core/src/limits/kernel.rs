//! Logarithmic averaging kernels `k_ε(u) = 1_{(0,1)}(u) ε² u^{ε−1} |log u|`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::quad;

pub const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingKernelParams {
    pub eps: f64,
    pub u_cut: f64,
}

impl AveragingKernelParams {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(param(format!("eps must be positive, got {eps}")));
        }
        Ok(Self { eps, u_cut: 1.0 })
    }
}

pub fn kernel_k_eps(eps: f64, u: f64) -> Result<f64> {
    AveragingKernelParams::new(eps)?;
    if !(u > 0.0) {
        return Err(param(format!("kernel argument must be positive, got {u}")));
    }
    Ok(if u < 1.0 { eps * eps * u.powf(eps - 1.0) * -u.ln() } else { 0.0 })
}

/// Quadrature value against its exact right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub quadrature: f64,
    pub exact: f64,
    pub abs_error: f64,
    pub quad_error_estimate: f64,
}

impl IdentityCheck {
    fn new((quadrature, est): (f64, f64), exact: f64) -> Self {
        Self { quadrature, exact, abs_error: (quadrature - exact).abs(), quad_error_estimate: est }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIdentityReport {
    pub eps: f64,
    pub r: f64,
    /// `∫_0^∞ k_ε(u) du = 1`.
    pub normalization: IdentityCheck,
    /// `∫_0^r k_ε(u) / |log u| du = ε r^ε`.
    pub truncated: IdentityCheck,
}

impl KernelIdentityReport {
    pub fn max_abs_error(&self) -> f64 {
        self.normalization.abs_error.max(self.truncated.abs_error)
    }
}

/// Integrals are taken in `y = −log u`, where `k_ε(u) du = ε² y e^{−εy} dy`.
pub fn kernel_identities(eps: f64, r: f64) -> Result<KernelIdentityReport> {
    AveragingKernelParams::new(eps)?;
    if !(0.0..1.0).contains(&r) {
        return Err(param(format!("r must lie in [0, 1), got {r}")));
    }
    let norm = quad::integrate_to_infinity(|y| eps * eps * y * (-eps * y).exp(), 0.0, QUAD_TOL);
    let truncated = if r == 0.0 {
        (0.0, 0.0)
    } else {
        quad::integrate_to_infinity(|y| eps * eps * (-eps * y).exp(), -r.ln(), QUAD_TOL)
    };
    Ok(KernelIdentityReport {
        eps,
        r,
        normalization: IdentityCheck::new(norm, 1.0),
        truncated: IdentityCheck::new(truncated, eps * r.powf(eps)),
    })
}

/// `∫_{u0}^∞ k_ε(u) du`, the kernel mass away from the origin.
pub fn kernel_mass_beyond(eps: f64, u0: f64) -> Result<f64> {
    AveragingKernelParams::new(eps)?;
    if !(u0 > 0.0) {
        return Err(param(format!("u0 must be positive, got {u0}")));
    }
    if u0 >= 1.0 {
        return Ok(0.0);
    }
    Ok(quad::integrate(|y| eps * eps * y * (-eps * y).exp(), 0.0, -u0.ln(), QUAD_TOL).0)
}
