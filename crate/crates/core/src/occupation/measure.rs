use crate::error::{param, Result};
use crate::process_sim::SamplePath;

/// Occupation measure `μ_{s,t}` of a path as weighted point masses on the
/// grid samples.
///
/// Weights integrate the piecewise-linear-in-time interpolant of any
/// integrand exactly, including the fractional cells at `s` and `t`. This
/// makes the construction additive: `μ_{0,t} − μ_{0,s} = μ_{s,t}` up to
/// floating-point rounding.
#[derive(Debug, Clone)]
pub struct OccupationMeasure<'a> {
    path: &'a SamplePath,
    s: f64,
    t: f64,
    first: usize,
    weights: Vec<f64>,
    step_scale: f64,
}

impl<'a> OccupationMeasure<'a> {
    pub fn new(path: &'a SamplePath, s: f64, t: f64) -> Result<Self> {
        let step_scale = 2.0 * path.median_step_length(0, path.len());
        Self::with_step_scale(path, s, t, step_scale)
    }

    /// Same as [`new`](Self::new) but reuse a precomputed singular-ball radius
    /// (saves a pass over the path when many windows share one path).
    pub fn with_step_scale(path: &'a SamplePath, s: f64, t: f64, step_scale: f64) -> Result<Self> {
        let horizon = path.horizon();
        if !(s.is_finite() && t.is_finite()) || !(t > s) {
            return Err(param(format!("degenerate interval [{s}, {t}]")));
        }
        if s < 0.0 || t > horizon * (1.0 + 1e-12) {
            return Err(param(format!("interval [{s}, {t}] leaves [0, {horizon}]")));
        }
        let t = t.min(horizon);
        let times = path.times();
        let (ks, kt) = (path.cell_of(s), path.cell_of(t));
        let mut weights = vec![0.0; kt - ks + 2];
        let add_piece = |k: usize, a: f64, b: f64, w: &mut Vec<f64>| {
            let (t0, t1) = (times[k], times[k + 1]);
            if b <= a {
                return;
            }
            let theta = 0.5 * ((a - t0) + (b - t0)) / (t1 - t0);
            w[k - ks] += (b - a) * (1.0 - theta);
            w[k + 1 - ks] += (b - a) * theta;
        };
        if ks == kt {
            add_piece(ks, s, t, &mut weights);
        } else {
            add_piece(ks, s, times[ks + 1], &mut weights);
            for k in ks + 1..kt {
                let h = 0.5 * (times[k + 1] - times[k]);
                weights[k - ks] += h;
                weights[k + 1 - ks] += h;
            }
            add_piece(kt, times[kt], t, &mut weights);
        }
        Ok(Self { path, s, t, first: ks, weights, step_scale })
    }

    pub fn path(&self) -> &'a SamplePath {
        self.path
    }

    pub fn dim(&self) -> usize {
        self.path.dim()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.s, self.t)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the first sample carrying weight.
    pub fn first_index(&self) -> usize {
        self.first
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius below which potentials switch to the local ball model.
    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }

    pub fn hurst_hint(&self) -> Option<f64> {
        self.path.hurst_hint()
    }

    /// `(grid index, position, weight)` for every sample with positive weight.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, &'a [f64], f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(j, &w)| (self.first + j, self.path.point(self.first + j), w))
    }

    /// Mass of the half-open box `[lo, hi)`.
    pub fn box_mass(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.atoms()
            .filter(|(_, x, _)| x.iter().zip(lo).zip(hi).all(|((v, a), b)| a <= v && v < b))
            .map(|(_, _, w)| w)
            .sum()
    }

    /// Mass of the open ball `B(x, r)`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        let r2 = r * r;
        self.atoms()
            .filter(|(_, p, _)| crate::process_sim::path::dist2(p, x) < r2)
            .map(|(_, _, w)| w)
            .sum()
    }

    /// Sorted distances from `x` to every atom with their weights, for
    /// repeated ball-mass queries.
    pub fn distance_profile(&self, x: &[f64]) -> DistanceProfile {
        let mut pairs: Vec<(f64, f64)> = self
            .atoms()
            .map(|(_, p, w)| (crate::process_sim::path::dist(p, x), w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = 0.0;
        let (dists, cums) = pairs
            .into_iter()
            .map(|(d, w)| {
                cum += w;
                (d, cum)
            })
            .unzip();
        DistanceProfile { dists, cums }
    }

    /// Smallest and largest coordinates of the atoms.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (_, x, _) in self.atoms() {
            for l in 0..d {
                lo[l] = lo[l].min(x[l]);
                hi[l] = hi[l].max(x[l]);
            }
        }
        (lo, hi)
    }
}

/// Cumulative ball masses `r ↦ μ(B(x, r))` around a fixed center.
#[derive(Debug, Clone)]
pub struct DistanceProfile {
    dists: Vec<f64>,
    cums: Vec<f64>,
}

impl DistanceProfile {
    /// `μ(B(x, r))` for the open ball.
    pub fn mass_within(&self, r: f64) -> f64 {
        let k = self.dists.partition_point(|&d| d < r);
        if k == 0 {
            0.0
        } else {
            self.cums[k - 1]
        }
    }

    pub fn distances(&self) -> &[f64] {
        &self.dists
    }

    pub fn total(&self) -> f64 {
        self.cums.last().copied().unwrap_or(0.0)
    }

    /// `(distance, weight)` pairs in increasing distance order.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mut prev = 0.0;
        self.dists.iter().zip(&self.cums).map(move |(&d, &c)| {
            let w = c - prev;
            prev = c;
            (d, w)
        })
    }
}

pub fn occupation_measure(path: &SamplePath, s: f64, t: f64) -> Result<OccupationMeasure<'_>> {
    OccupationMeasure::new(path, s, t)
}
