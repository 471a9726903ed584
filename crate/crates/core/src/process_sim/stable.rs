//! Symmetric β-stable increments by the Chambers–Mallows–Stuck transform.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// One standard symmetric β-stable draw. Under this convention β = 2 gives
/// `N(0, 2)` and β = 1 gives the standard Cauchy law.
pub fn symmetric_stable<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> f64 {
    let v = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
    let w: f64 = Exp1.sample(rng);
    if (beta - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let a = (beta * v).sin() / v.cos().powf(1.0 / beta);
    a * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// One coordinate of a symmetric stable Lévy path.
pub fn sample_path<R: Rng + ?Sized>(rng: &mut R, beta: f64, horizon: f64, out: &mut [f64]) {
    let n = out.len() - 1;
    let scale = (horizon / n as f64).powf(1.0 / beta);
    out[0] = 0.0;
    let mut acc = 0.0;
    for v in &mut out[1..] {
        acc += scale * symmetric_stable(rng, beta);
        *v = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gaussian_endpoint_has_variance_two() {
        let mut rng = stream(5, 0, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| symmetric_stable(&mut rng, 2.0)).collect();
        let v = crate::stats::variance(&xs);
        assert!((v - 2.0).abs() < 0.03, "variance {v}");
    }

    #[test]
    fn cauchy_quartiles() {
        let mut rng = stream(6, 0, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| symmetric_stable(&mut rng, 1.0)).collect();
        let q = crate::stats::quantile(&xs, 0.75);
        assert!((q - 1.0).abs() < 0.03, "upper quartile {q}");
    }
}
