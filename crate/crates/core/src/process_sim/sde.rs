//! Pathwise solvers for `dX = V_0(X) dt + Σ_i V_i(X) dB^i` driven by fBm with
//! `H ≥ 1/2` (Young integral for `H > 1/2`, Stratonovich for `H = 1/2`).

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::process_sim::path::SamplePath;

/// Coefficients of the equation. `diffusion` writes the `d × d` matrix whose
/// column `i` is `V_i(x)`, column-major.
pub trait VectorFields {
    fn dim(&self) -> usize;
    fn drift(&self, x: &[f64], out: &mut [f64]);
    fn diffusion(&self, x: &[f64], out: &mut [f64]);
    /// Uniform ellipticity constant `λ`, when known.
    fn ellipticity(&self) -> Option<f64> {
        None
    }
}

/// Built-in coefficient families that can live in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SdeModel {
    /// `V_0 = 0`, `V = I`: the solution is `x0 + B`.
    Additive { dim: usize },
    /// `V_0 = 0`, `V_i(x) = σ x_i e_i`: solution `x0_i exp(σ B^i)`.
    Geometric { dim: usize, sigma: f64 },
    /// `V_0(x) = −sin x`, `V_i(x) = (1 + a sin x_i) e_i` with `|a| < 1`;
    /// bounded, smooth and uniformly elliptic with `λ = (1 − |a|)²`.
    Elliptic { dim: usize, amplitude: f64 },
}

impl SdeModel {
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(param(format!("sde model has dimension {}, path has {dim}", self.dim())));
        }
        if let Self::Elliptic { amplitude, .. } = self {
            if amplitude.abs() >= 1.0 {
                return Err(param(format!("elliptic model needs |amplitude| < 1, got {amplitude}")));
            }
        }
        Ok(())
    }
}

impl VectorFields for SdeModel {
    fn dim(&self) -> usize {
        match *self {
            Self::Additive { dim } | Self::Geometric { dim, .. } | Self::Elliptic { dim, .. } => dim,
        }
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Self::Additive { .. } | Self::Geometric { .. } => out.fill(0.0),
            Self::Elliptic { .. } => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = -xi.sin();
                }
            }
        }
    }

    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        out.fill(0.0);
        for i in 0..d {
            out[i * d + i] = match *self {
                Self::Additive { .. } => 1.0,
                Self::Geometric { sigma, .. } => sigma * x[i],
                Self::Elliptic { amplitude, .. } => 1.0 + amplitude * x[i].sin(),
            };
        }
    }

    fn ellipticity(&self) -> Option<f64> {
        match *self {
            Self::Additive { .. } => Some(1.0),
            Self::Geometric { .. } => None,
            Self::Elliptic { amplitude, .. } => Some((1.0 - amplitude.abs()).powi(2)),
        }
    }
}

/// Integration scheme, chosen from the driver's Hurst index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Heun,
    Midpoint,
}

impl Scheme {
    pub fn for_hurst(hurst: f64) -> Result<Self> {
        if hurst < 0.5 {
            Err(Error::UnsupportedRegime { hurst })
        } else if hurst == 0.5 {
            Ok(Self::Midpoint)
        } else {
            Ok(Self::Heun)
        }
    }
}

/// Solve on the driver's grid. The driver is a `d`-dimensional path whose
/// Hurst index picks the scheme.
pub fn solve<V: VectorFields + ?Sized>(fields: &V, x0: &[f64], driver: &SamplePath, hurst: f64) -> Result<SamplePath> {
    let scheme = Scheme::for_hurst(hurst)?;
    let d = fields.dim();
    if driver.dim() != d || x0.len() != d {
        return Err(param(format!(
            "dimension mismatch: fields {d}, x0 {}, driver {}",
            x0.len(),
            driver.dim()
        )));
    }
    let n = driver.len();
    let mut positions = Vec::with_capacity(n * d);
    positions.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let (mut b0, mut s0) = (vec![0.0; d], vec![0.0; d * d]);
    let (mut b1, mut s1) = (vec![0.0; d], vec![0.0; d * d]);
    let mut y = vec![0.0; d];
    let mut db = vec![0.0; d];
    for k in 0..n - 1 {
        let dt = driver.times()[k + 1] - driver.times()[k];
        for (l, v) in db.iter_mut().enumerate() {
            *v = driver.point(k + 1)[l] - driver.point(k)[l];
        }
        fields.drift(&x, &mut b0);
        fields.diffusion(&x, &mut s0);
        match scheme {
            Scheme::Heun => {
                euler_step(&x, &b0, &s0, &db, dt, 1.0, &mut y);
                fields.drift(&y, &mut b1);
                fields.diffusion(&y, &mut s1);
                for i in 0..d {
                    let mut inc = 0.5 * (b0[i] + b1[i]) * dt;
                    for j in 0..d {
                        inc += 0.5 * (s0[j * d + i] + s1[j * d + i]) * db[j];
                    }
                    x[i] += inc;
                }
            }
            Scheme::Midpoint => {
                euler_step(&x, &b0, &s0, &db, dt, 0.5, &mut y);
                fields.drift(&y, &mut b1);
                fields.diffusion(&y, &mut s1);
                euler_step(&x, &b1, &s1, &db, dt, 1.0, &mut y);
                x.copy_from_slice(&y);
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Model(format!("solution blew up at step {k}, coordinate {i}")));
        }
        positions.extend_from_slice(&x);
    }
    SamplePath::new(driver.times().to_vec(), positions, d, Some(hurst))
}

fn euler_step(x: &[f64], b: &[f64], s: &[f64], db: &[f64], dt: f64, frac: f64, out: &mut [f64]) {
    let d = x.len();
    for i in 0..d {
        let mut inc = b[i] * dt;
        for j in 0..d {
            inc += s[j * d + i] * db[j];
        }
        out[i] = x[i] + frac * inc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_driver(n: usize) -> SamplePath {
        SamplePath::from_fn(n, 1.0, 2, None, |_, t, x| {
            x[0] = (3.0 * t).sin();
            x[1] = t * t;
        })
        .unwrap()
    }

    #[test]
    fn additive_reproduces_driver() {
        let drv = line_driver(64);
        let sol = solve(&SdeModel::Additive { dim: 2 }, &[1.0, -2.0], &drv, 0.7).unwrap();
        for (p, q) in sol.points().zip(drv.points()) {
            assert!((p[0] - (1.0 + q[0])).abs() < 1e-12);
            assert!((p[1] - (-2.0 + q[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn rough_regime_is_rejected() {
        let drv = line_driver(8);
        let err = solve(&SdeModel::Additive { dim: 2 }, &[0.0, 0.0], &drv, 0.3).unwrap_err();
        assert!(matches!(err, Error::UnsupportedRegime { .. }));
    }

    #[test]
    fn smooth_driver_geometric_matches_exponential() {
        // For a smooth driver both schemes are second order.
        let drv = SamplePath::from_fn(1024, 1.0, 1, None, |_, t, x| x[0] = (2.0 * t).sin()).unwrap();
        for h in [0.5, 0.75] {
            let sol = solve(&SdeModel::Geometric { dim: 1, sigma: 1.0 }, &[2.0], &drv, h).unwrap();
            let exact = 2.0 * (2.0f64).sin().exp();
            assert!((sol.point(1024)[0] - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn elliptic_constant() {
        let m = SdeModel::Elliptic { dim: 1, amplitude: 0.5 };
        assert_eq!(m.ellipticity(), Some(0.25));
        assert!(SdeModel::Elliptic { dim: 1, amplitude: 1.0 }.check_dim(1).is_err());
    }
}
