//! Fractional Gaussian noise by circulant embedding.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Error, Result};

/// Largest grid handled by the dense Cholesky fallback.
pub const CHOLESKY_LIMIT: usize = 1 << 12;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocov(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

enum Method {
    Circulant { sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky(DMatrix<f64>),
}

/// Reusable sampler of `n` consecutive fGn values with unit-step variance.
///
/// Building the generator costs one FFT (or one Cholesky factorization);
/// each draw afterwards costs one FFT of length `2n`.
pub struct FbmGenerator {
    n: usize,
    hurst: f64,
    method: Method,
}

impl FbmGenerator {
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        Self::with_cholesky_limit(hurst, n, CHOLESKY_LIMIT)
    }

    pub fn with_cholesky_limit(hurst: f64, n: usize, limit: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(param(format!("Hurst index {hurst} outside (0, 1)")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Resolution { n_steps: n });
        }
        let method = match circulant_sqrt_eigenvalues(hurst, n) {
            Some((sqrt_eig, fft)) => Method::Circulant { sqrt_eig, fft },
            None => Method::Cholesky(toeplitz_cholesky(hurst, n, limit)?),
        };
        Ok(Self { n, hurst, method })
    }

    /// Force the dense route (used to cross-check the FFT route).
    pub fn cholesky(hurst: f64, n: usize) -> Result<Self> {
        if n > CHOLESKY_LIMIT {
            return Err(Error::Capacity { needed: n, limit: CHOLESKY_LIMIT });
        }
        Ok(Self { n, hurst, method: Method::Cholesky(toeplitz_cholesky(hurst, n, CHOLESKY_LIMIT)?) })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn uses_fft(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Fill `out` (length `n`) with one fGn draw.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        assert_eq!(out.len(), self.n);
        match &self.method {
            Method::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|&s| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                for (o, y) in out.iter_mut().zip(&buf) {
                    *o = y.re;
                }
            }
            Method::Cholesky(l) => {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = l * z;
                out.copy_from_slice(y.as_slice());
            }
        }
    }

    /// One coordinate of an fBm path on `n` cells of `[0, horizon]`, starting at 0.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, horizon: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.n + 1);
        let scale = (horizon / self.n as f64).powf(self.hurst);
        out[0] = 0.0;
        self.sample_noise(rng, &mut out[1..]);
        let mut acc = 0.0;
        for v in &mut out[1..] {
            acc += scale * *v;
            *v = acc;
        }
    }
}

/// `sqrt(λ_k / 2n)` for the minimal circulant embedding, or `None` when a
/// clearly negative eigenvalue shows up.
fn circulant_sqrt_eigenvalues(hurst: f64, n: usize) -> Option<(Vec<f64>, Arc<dyn Fft<f64>>)> {
    let m = 2 * n;
    let mut row: Vec<Complex64> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex64::new(fgn_autocov(hurst, lag), 0.0)
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
    let floor = -1e-10 * max.max(1.0);
    let mut sqrt_eig = Vec::with_capacity(m);
    for c in &row {
        if c.re < floor {
            return None;
        }
        sqrt_eig.push((c.re.max(0.0) / m as f64).sqrt());
    }
    Some((sqrt_eig, fft))
}

fn toeplitz_cholesky(hurst: f64, n: usize, limit: usize) -> Result<DMatrix<f64>> {
    if n > limit {
        return Err(Error::Capacity { needed: n, limit });
    }
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocov(hurst, k)).collect();
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    cov.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Model("fGn covariance is not positive definite".to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn autocov_brownian_is_white() {
        assert_eq!(fgn_autocov(0.5, 0), 1.0);
        assert!(fgn_autocov(0.5, 3).abs() < 1e-15);
        assert!(fgn_autocov(0.8, 1) > 0.0);
        assert!(fgn_autocov(0.3, 1) < 0.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(FbmGenerator::new(0.7, 1000), Err(Error::Resolution { n_steps: 1000 })));
        assert!(matches!(
            FbmGenerator::with_cholesky_limit(0.7, 1 << 13, 1 << 12).map(|g| g.uses_fft()),
            Ok(true)
        ));
        assert!(matches!(FbmGenerator::cholesky(0.7, 1 << 13), Err(Error::Capacity { .. })));
    }

    #[test]
    fn fft_and_cholesky_agree_in_covariance() {
        // Empirical lag-1 autocorrelation of noise from both routes matches the target.
        for &h in &[0.3, 0.75] {
            for g in [FbmGenerator::new(h, 64).unwrap(), FbmGenerator::cholesky(h, 64).unwrap()] {
                let mut rng = stream(11, 0, 0);
                let mut buf = vec![0.0; 64];
                let (mut s0, mut s1) = (0.0, 0.0);
                let reps = 4000;
                for _ in 0..reps {
                    g.sample_noise(&mut rng, &mut buf);
                    s0 += buf[10] * buf[10];
                    s1 += buf[10] * buf[11];
                }
                let (v0, v1) = (s0 / reps as f64, s1 / reps as f64);
                assert!((v0 - 1.0).abs() < 0.1, "var {v0}");
                assert!((v1 - fgn_autocov(h, 1)).abs() < 0.1, "lag1 {v1}");
            }
        }
    }
}
