//! Browser bindings: sample a one-dimensional path, draw the rescaled Riesz
//! potential of its occupation measure against a local-time histogram, and
//! watch the potential converge to local time as the order goes to zero.

use occuriesz::limits::potential_limit_alpha_to_zero;
use occuriesz::occupation::{default_bin_width, local_time_at, local_time_histogram, rescaled_potential, OccupationMeasure};
use occuriesz::{ProcessSpec, SamplePath, Sampler};
use wasm_bindgen::prelude::*;

fn js_err(e: occuriesz::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn sample(hurst: f64, n_steps: usize, seed: u64) -> occuriesz::Result<SamplePath> {
    let spec = if hurst == 0.5 { ProcessSpec::brownian(1, n_steps) } else { ProcessSpec::fbm(hurst, 1, n_steps) };
    Sampler::new(&spec.with_seed(seed))?.sample(0)
}

/// Positions of a one-dimensional fBm path (Brownian when `hurst = 0.5`).
#[wasm_bindgen]
pub fn simulate_path(hurst: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    Ok(sample(hurst, n_steps, seed).map_err(js_err)?.positions().to_vec())
}

#[wasm_bindgen]
pub struct Profile {
    xs: Vec<f64>,
    potential: Vec<f64>,
    histogram: Vec<f64>,
}

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }

    /// `α/(2ω_1) U^α μ(x)` at each `x`.
    #[wasm_bindgen(getter)]
    pub fn potential(&self) -> Vec<f64> {
        self.potential.clone()
    }

    /// Local-time histogram density at each `x`.
    #[wasm_bindgen(getter)]
    pub fn histogram(&self) -> Vec<f64> {
        self.histogram.clone()
    }
}

/// Rescaled potential of order `alpha` on `points` evenly spaced positions
/// spanning the path's range, next to the histogram local time.
#[wasm_bindgen]
pub fn potential_profile(hurst: f64, n_steps: usize, seed: u64, alpha: f64, points: usize) -> Result<Profile, JsError> {
    profile(hurst, n_steps, seed, alpha, points).map_err(js_err)
}

fn profile(hurst: f64, n_steps: usize, seed: u64, alpha: f64, points: usize) -> occuriesz::Result<Profile> {
    let path = sample(hurst, n_steps, seed)?;
    let occ = OccupationMeasure::new(&path, 0.0, path.horizon())?;
    let hist = local_time_histogram(&occ, default_bin_width(&occ))?;
    let (lo, hi) = path.positions().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let points = points.max(2);
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let potential = xs
        .iter()
        .map(|&x| rescaled_potential(&occ, alpha, &[x]).map(|e| e.value))
        .collect::<occuriesz::Result<Vec<_>>>()?;
    let histogram = xs.iter().map(|&x| hist.density_at(&[x])).collect();
    Ok(Profile { xs, potential, histogram })
}

#[wasm_bindgen]
pub struct AlphaSequence {
    alphas: Vec<f64>,
    values: Vec<f64>,
    limit: f64,
    local_time: f64,
}

#[wasm_bindgen]
impl AlphaSequence {
    #[wasm_bindgen(getter)]
    pub fn alphas(&self) -> Vec<f64> {
        self.alphas.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Extrapolated value at `α = 0`.
    #[wasm_bindgen(getter)]
    pub fn limit(&self) -> f64 {
        self.limit
    }

    /// Histogram local time at the same point.
    #[wasm_bindgen(getter)]
    pub fn local_time(&self) -> f64 {
        self.local_time
    }
}

/// Rescaled potential at the path value `X(t)` for `α = 2^-1, …, 2^-levels`.
#[wasm_bindgen]
pub fn alpha_to_zero(n_steps: usize, seed: u64, t: f64, levels: i32) -> Result<AlphaSequence, JsError> {
    alpha_sequence(n_steps, seed, t, levels).map_err(js_err)
}

fn alpha_sequence(n_steps: usize, seed: u64, t: f64, levels: i32) -> occuriesz::Result<AlphaSequence> {
    let path = sample(0.5, n_steps, seed)?;
    let occ = OccupationMeasure::new(&path, 0.0, path.horizon())?;
    let mut x = [0.0];
    path.interpolate(t.clamp(0.0, path.horizon()), &mut x);
    let alphas: Vec<f64> = (1..=levels.max(3)).map(|k| 0.5f64.powi(k)).collect();
    let report = potential_limit_alpha_to_zero(&occ, &x, &alphas)?;
    let local_time = local_time_at(&occ, &x, default_bin_width(&occ))?;
    Ok(AlphaSequence { alphas, values: report.values, limit: report.limit, local_time })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_matches_histogram_for_small_alpha() {
        let p = profile(0.5, 1 << 13, 3, 1.0 / 64.0, 9).unwrap();
        assert_eq!(p.xs().len(), 9);
        let mid = 4;
        let rel = (p.potential()[mid] - p.histogram()[mid]).abs() / p.histogram()[mid];
        assert!(rel < 0.5, "{rel}");
    }

    #[test]
    fn alpha_sequence_ends_near_local_time() {
        let s = alpha_sequence(1 << 14, 1, 0.5, 8).unwrap();
        assert_eq!(s.values().len(), 8);
        assert!((s.limit() - s.local_time()).abs() / s.local_time() < 0.25);
    }

    #[test]
    fn path_has_one_position_per_time() {
        assert_eq!(sample(0.7, 256, 0).unwrap().len(), 257);
    }
}
