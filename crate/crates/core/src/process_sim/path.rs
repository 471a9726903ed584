use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A discretized realization `t ↦ X_t ∈ R^d` on a time grid starting at 0.
///
/// Positions are stored row-major: sample `i` occupies
/// `positions[i * dim .. (i + 1) * dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    times: Vec<f64>,
    positions: Vec<f64>,
    dim: usize,
    hurst_hint: Option<f64>,
}

impl SamplePath {
    pub fn new(times: Vec<f64>, positions: Vec<f64>, dim: usize, hurst_hint: Option<f64>) -> Result<Self> {
        let path = Self { times, positions, dim, hurst_hint };
        path.validate()?;
        Ok(path)
    }

    /// Uniform grid of `n_steps` cells on `[0, horizon]`; `f(i)` writes sample `i`.
    pub fn from_fn(
        n_steps: usize,
        horizon: f64,
        dim: usize,
        hurst_hint: Option<f64>,
        mut f: impl FnMut(usize, f64, &mut [f64]),
    ) -> Result<Self> {
        let times = uniform_grid(n_steps, horizon);
        let mut positions = vec![0.0; (n_steps + 1) * dim];
        for (i, (&t, row)) in times.iter().zip(positions.chunks_exact_mut(dim.max(1))).enumerate() {
            f(i, t, row);
        }
        Self::new(times, positions, dim, hurst_hint)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(param("path dimension must be at least 1"));
        }
        if self.times.len() < 2 {
            return Err(param("a path needs at least two samples"));
        }
        if self.positions.len() != self.times.len() * self.dim {
            return Err(param(format!(
                "positions hold {} values, expected {} samples × {} coordinates",
                self.positions.len(),
                self.times.len(),
                self.dim
            )));
        }
        if self.times[0] != 0.0 {
            return Err(param("time grid must start at 0"));
        }
        if let Some(w) = self.times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(param(format!("time grid not strictly increasing at index {}", w + 1)));
        }
        if let Some(i) = self.positions.iter().position(|x| !x.is_finite()) {
            return Err(param(format!("non-finite coordinate at sample {}", i / self.dim)));
        }
        if let Some(h) = self.hurst_hint {
            if !(h > 0.0 && h <= 1.0) {
                return Err(param(format!("hurst hint {h} outside (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples (grid points), i.e. `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("validated path is nonempty")
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.positions.chunks_exact(self.dim)
    }

    /// Coordinate `l` of every sample.
    pub fn coordinate(&self, l: usize) -> impl Iterator<Item = f64> + '_ {
        self.positions.iter().skip(l).step_by(self.dim).copied()
    }

    pub fn hurst_hint(&self) -> Option<f64> {
        self.hurst_hint
    }

    pub fn with_hurst_hint(mut self, h: Option<f64>) -> Self {
        self.hurst_hint = h;
        self
    }

    /// Position at time `t` by linear interpolation.
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        let i = self.cell_of(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let theta = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        for (l, o) in out.iter_mut().enumerate() {
            let a = self.positions[i * self.dim + l];
            let b = self.positions[(i + 1) * self.dim + l];
            *o = a + theta * (b - a);
        }
    }

    /// Index `i` of the cell `[t_i, t_{i+1}]` containing `t` (clamped to the grid).
    pub fn cell_of(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let i = self.cell_of(t);
        if (t - self.times[i]).abs() <= (self.times[i + 1] - t).abs() {
            i
        } else {
            i + 1
        }
    }

    /// Keep every `stride`-th sample (the last sample must be on the stride).
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.n_steps() % stride != 0 {
            return Err(param(format!("stride {stride} does not divide n_steps = {}", self.n_steps())));
        }
        let times = self.times.iter().step_by(stride).copied().collect();
        let positions = self.points().step_by(stride).flatten().copied().collect();
        Self::new(times, positions, self.dim, self.hurst_hint)
    }

    /// Median Euclidean length of one grid step.
    pub fn median_step_length(&self, from: usize, to: usize) -> f64 {
        let mut steps: Vec<f64> = (from..to.min(self.len() - 1))
            .map(|i| dist(self.point(i), self.point(i + 1)))
            .collect();
        if steps.is_empty() {
            return 0.0;
        }
        let mid = steps.len() / 2;
        *steps.select_nth_unstable_by(mid, f64::total_cmp).1
    }
}

pub fn uniform_grid(n_steps: usize, horizon: f64) -> Vec<f64> {
    (0..=n_steps).map(|k| k as f64 * horizon / n_steps as f64).collect()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}
