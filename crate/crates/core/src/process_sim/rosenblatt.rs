//! Rosenblatt paths as normalized second-Hermite partial sums of a
//! long-memory Gaussian sequence.
//!
//! The micro-sequence is fractional Gaussian noise with Hurst index
//! `H0 = (1 + H) / 2`, whose autocovariance decays like `k^{H-1}`. Partial sums
//! of `ξ_k² − 1` then converge to a Rosenblatt process of index `H`.

use rand::Rng;

use crate::error::{param, Result};
use crate::process_sim::fbm::{fgn_autocov, FbmGenerator};

pub const DEFAULT_MICRO_STEPS: usize = 256;

pub struct RosenblattGenerator {
    noise: FbmGenerator,
    n_steps: usize,
    micro: usize,
    /// Exact variance of the full partial sum of `ξ² − 1`.
    total_variance: f64,
}

impl RosenblattGenerator {
    pub fn new(hurst: f64, n_steps: usize, micro: usize) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(param(format!("Rosenblatt index must lie in (1/2, 1), got {hurst}")));
        }
        if micro < 2 {
            return Err(param("at least 2 micro-steps per output step are needed"));
        }
        let total = n_steps * micro;
        let noise = FbmGenerator::new(0.5 * (1.0 + hurst), total)?;
        Ok(Self { total_variance: hermite2_sum_variance(noise.hurst(), total), noise, n_steps, micro })
    }

    /// One coordinate on `n_steps` cells of `[0, horizon]`, scaled so that
    /// `Var Z_T = T^{2H}`.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, horizon: f64, hurst: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.n_steps + 1);
        let mut xi = vec![0.0; self.noise.len()];
        self.noise.sample_noise(rng, &mut xi);
        let scale = horizon.powf(hurst) / self.total_variance.sqrt();
        out[0] = 0.0;
        let mut acc = 0.0;
        for (j, block) in xi.chunks_exact(self.micro).enumerate() {
            acc += block.iter().map(|x| x * x - 1.0).sum::<f64>();
            out[j + 1] = scale * acc;
        }
    }
}

/// `Var Σ_{k<N} (ξ_k² − 1) = 2 [N + 2 Σ_{k=1}^{N-1} (N − k) ρ(k)²]` for unit
/// fGn of index `h0`.
pub fn hermite2_sum_variance(h0: f64, n: usize) -> f64 {
    let tail: f64 = (1..n)
        .map(|k| {
            let r = fgn_autocov(h0, k);
            (n - k) as f64 * r * r
        })
        .sum();
    2.0 * (n as f64 + 2.0 * tail)
}
