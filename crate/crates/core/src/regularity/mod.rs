//! Monte Carlo scaling laws of potentials and path oscillations.

pub mod fit;

pub use fit::{build_fit, write_fit_csv, Aggregate, CorrectionForm, FitInput, LogCorrection, ScalingFit};

use std::collections::BTreeSet;
use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::occupation::{
    check_admissible, default_bin_width, local_time_histogram, rescaled_potential, rescaling_factor,
    sup_potential_at_sites, AdmissibleParams, AtomKernel, BallModel, OccupationMeasure,
};
use crate::par::map_indexed;
use crate::process_sim::path::{dist, dist2};
use crate::process_sim::{ProcessKind, ProcessSpec, SamplePath, Sampler};
use crate::stats;

/// Produces replication `rep` of a path; must be deterministic in `rep`.
pub type PathSource<'a> = dyn Fn(u64) -> Result<SamplePath> + Sync + 'a;

/// Dyadic radii `2^{-from} > … > 2^{-to}`.
pub fn dyadic_radii(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 0.5f64.powi(k)).collect()
}

fn is_stub(spec: &ProcessSpec) -> bool {
    matches!(spec.kind, ProcessKind::Constant | ProcessKind::Linear)
}

/// Admissibility of `(H, d, α, β)` for a stochastic spec; stubs pass.
pub fn admissible_for(spec: &ProcessSpec, alpha: f64, beta_incr: Option<f64>) -> Result<Option<AdmissibleParams>> {
    if is_stub(spec) {
        return Ok(None);
    }
    Ok(Some(check_admissible(spec.effective_hurst(), spec.dim, alpha, beta_incr)?))
}

fn check_radii(radii: &[f64], t_center: f64, horizon: f64) -> Result<()> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(param("radii must be nonempty and strictly decreasing"));
    }
    let room = t_center.min(horizon - t_center);
    if radii[0] > room || !(radii[radii.len() - 1] > 0.0) {
        return Err(param(format!("radii must lie in (0, {room}] around t = {t_center}")));
    }
    Ok(())
}

fn window_samples(path: &SamplePath, r: f64) -> usize {
    (2.0 * r / (path.horizon() / path.n_steps() as f64)).round() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupScalingOptions {
    /// Evaluation sites added per radius (sites are nested across radii).
    pub max_sites_per_radius: usize,
    /// Windows with fewer samples are excluded from the fit.
    pub min_window_samples: usize,
    pub bootstrap: usize,
    pub aggregate: Aggregate,
    /// Evaluate at this fixed point instead of taking the sup over space.
    pub fixed_point: Option<Vec<f64>>,
    /// Use the `(log 1/r)` correction of the uniform-in-time law instead of
    /// `(log log 1/r)`.
    pub uniform_correction: bool,
}

impl Default for SupScalingOptions {
    fn default() -> Self {
        Self {
            max_sites_per_radius: 512,
            min_window_samples: 32,
            bootstrap: 1000,
            aggregate: Aggregate::Max,
            fixed_point: None,
            uniform_correction: false,
        }
    }
}

/// Scaling of `sup_x L^{α,X}(x, [t − r, t + r])` in `r`; expected slope
/// `1 − H(d − α)`. For `α = 0` the statistic is the largest histogram local
/// time in the window.
pub fn sup_l_scaling(
    spec: &ProcessSpec,
    alpha: f64,
    t_center: f64,
    radii: &[f64],
    n_reps: usize,
    opts: &SupScalingOptions,
) -> Result<ScalingFit> {
    admissible_for(spec, alpha, None)?;
    let sampler = Sampler::new(spec)?;
    let source = |rep: u64| sampler.sample(rep);
    sup_l_scaling_with(&source, spec, alpha, t_center, radii, n_reps, opts)
}

pub fn sup_l_scaling_with(
    source: &PathSource<'_>,
    spec: &ProcessSpec,
    alpha: f64,
    t_center: f64,
    radii: &[f64],
    n_reps: usize,
    opts: &SupScalingOptions,
) -> Result<ScalingFit> {
    check_radii(radii, t_center, spec.horizon)?;
    if n_reps == 0 {
        return Err(param("n_reps must be positive"));
    }
    let rows = map_indexed(n_reps, |rep| sup_statistics(&source(rep as u64)?, alpha, t_center, radii, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let probe = source(0)?;
    let used = radii.iter().map(|&r| window_samples(&probe, r) >= opts.min_window_samples).collect();
    let h = spec.effective_hurst();
    let d = spec.dim as f64;
    let power = h * (spec.theta() + d - alpha);
    let correction = if opts.uniform_correction { LogCorrection::log(power) } else { LogCorrection::loglog(power) };
    let mut fit = build_fit(FitInput {
        radii,
        per_replication: rows,
        used,
        aggregate: opts.aggregate,
        log_correction: correction,
        expected: if is_stub(spec) && opts.fixed_point.is_some() { 1.0 } else { 1.0 - h * (d - alpha) },
        bootstrap: opts.bootstrap,
        seed: spec.seed,
    });
    fit.notes.push(format!("t_center = {t_center}; a single time point is tested"));
    if spec.kind == ProcessKind::YoungSde {
        fit.notes.push("log-correction power for SDE paths is not distinguishable at this scale".into());
    }
    Ok(fit)
}

/// Per-radius statistic for one path. Evaluation sites are path points on
/// aligned power-of-two strides, nested so that the statistic is
/// nondecreasing in `r`.
pub fn sup_statistics(path: &SamplePath, alpha: f64, t_center: f64, radii: &[f64], opts: &SupScalingOptions) -> Result<Vec<f64>> {
    let step_scale = 2.0 * path.median_step_length(0, path.len());
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let mut out = vec![0.0; radii.len()];
    let mut sites: BTreeSet<usize> = BTreeSet::new();
    let bin = (path.horizon() / path.n_steps() as f64).powf(path.hurst_hint().unwrap_or(0.5));
    for k in order {
        let r = radii[k];
        let occ = OccupationMeasure::with_step_scale(path, t_center - r, t_center + r, step_scale)?;
        out[k] = if let Some(x) = &opts.fixed_point {
            if alpha == 0.0 {
                crate::occupation::local_time_at(&occ, x, bin)?
            } else {
                rescaled_potential(&occ, alpha, x)?.value
            }
        } else if alpha == 0.0 {
            local_time_histogram(&occ, default_bin_width(&occ))?.max_density().0
        } else {
            let first = occ.first_index();
            let last = first + occ.weights().len() - 1;
            let n = last - first + 1;
            let stride = n.div_ceil(opts.max_sites_per_radius.max(1)).next_power_of_two();
            let start = first.div_ceil(stride) * stride;
            sites.extend((start..=last).step_by(stride));
            let list: Vec<usize> = sites.iter().copied().collect();
            sup_potential_at_sites(&occ, alpha, &list)?.value
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    pub fit: ScalingFit,
    /// `osc(r) / (r^H (log log 1/r)^{−H(θ/(d−α)+1)})` of the aggregated statistic.
    pub normalized: Vec<f64>,
    pub min_normalized: f64,
    /// The normalized ratio collapses to (near) zero on the fitted radii.
    pub vanishes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationOptions {
    pub min_window_samples: usize,
    pub bootstrap: usize,
    pub aggregate: Aggregate,
}

impl Default for OscillationOptions {
    fn default() -> Self {
        Self { min_window_samples: 32, bootstrap: 1000, aggregate: Aggregate::Min }
    }
}

/// `osc(r) = max_{s ∈ (t−r, t+r)} ‖X_t − X_s‖`, aggregated by min over
/// replications; expected slope `H`.
pub fn lower_oscillation(
    spec: &ProcessSpec,
    t_center: f64,
    radii: &[f64],
    n_reps: usize,
    alpha_for_correction: f64,
    opts: &OscillationOptions,
) -> Result<OscillationFit> {
    admissible_for(spec, alpha_for_correction, None)?;
    let sampler = Sampler::new(spec)?;
    let source = |rep: u64| sampler.sample(rep);
    lower_oscillation_with(&source, spec, t_center, radii, n_reps, alpha_for_correction, opts)
}

pub fn lower_oscillation_with(
    source: &PathSource<'_>,
    spec: &ProcessSpec,
    t_center: f64,
    radii: &[f64],
    n_reps: usize,
    alpha_for_correction: f64,
    opts: &OscillationOptions,
) -> Result<OscillationFit> {
    check_radii(radii, t_center, spec.horizon)?;
    if n_reps == 0 {
        return Err(param("n_reps must be positive"));
    }
    let rows = map_indexed(n_reps, |rep| -> Result<Vec<f64>> {
        let path = source(rep as u64)?;
        Ok(radii.iter().map(|&r| oscillation(&path, t_center, r)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let probe = source(0)?;
    let used: Vec<bool> = radii.iter().map(|&r| window_samples(&probe, r) >= opts.min_window_samples).collect();
    let h = spec.effective_hurst();
    let d = spec.dim as f64;
    let power = -h * (spec.theta() / (d - alpha_for_correction) + 1.0);
    let correction = LogCorrection::loglog(power);
    let fit = build_fit(FitInput {
        radii,
        per_replication: rows,
        used: used.clone(),
        aggregate: opts.aggregate,
        log_correction: correction,
        expected: h,
        bootstrap: opts.bootstrap,
        seed: spec.seed,
    });
    let normalized: Vec<f64> = radii
        .iter()
        .zip(&fit.statistics)
        .map(|(&r, &s)| s / (r.powf(h) * correction.factor(r)))
        .collect();
    let fitted: Vec<f64> = normalized.iter().zip(&used).filter(|(_, &u)| u).map(|(&v, _)| v).collect();
    let min_normalized = fitted.iter().copied().fold(f64::INFINITY, f64::min);
    let max_normalized = fitted.iter().copied().fold(0.0, f64::max);
    let vanishes = !(min_normalized > 1e-9 * max_normalized) || max_normalized == 0.0;
    Ok(OscillationFit { fit, normalized, min_normalized, vanishes })
}

/// Largest distance from `X_t` over grid points strictly inside `(t − r, t + r)`.
pub fn oscillation(path: &SamplePath, t_center: f64, r: f64) -> f64 {
    let mut xt = vec![0.0; path.dim()];
    path.interpolate(t_center, &mut xt);
    path.times()
        .iter()
        .zip(path.points())
        .filter(|(&s, _)| (s - t_center).abs() < r)
        .map(|(_, p)| dist(p, &xt))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusFit {
    pub fit: ScalingFit,
    pub iota: f64,
    /// `M(r) / (r^H (log 1/r)^ι)` per radius.
    pub ratios: Vec<f64>,
    /// Upper decile over median of the ratios across radii.
    pub spread: f64,
    pub bounded: bool,
}

/// Global modulus `M(r) = sup_t sup_{|s−t|<r} ‖X_t − X_s‖` compared against
/// `r^H (log 1/r)^ι`; the ratio must stay bounded (spread below `max_spread`).
pub fn modulus_of_continuity(spec: &ProcessSpec, radii: &[f64], n_reps: usize, max_spread: f64) -> Result<ModulusFit> {
    let sampler = Sampler::new(spec)?;
    let source = |rep: u64| sampler.sample(rep);
    modulus_of_continuity_with(&source, spec, radii, n_reps, spec.iota(), max_spread)
}

pub fn modulus_of_continuity_with(
    source: &PathSource<'_>,
    spec: &ProcessSpec,
    radii: &[f64],
    n_reps: usize,
    iota: f64,
    max_spread: f64,
) -> Result<ModulusFit> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) || radii[0] >= spec.horizon {
        return Err(param("radii must be strictly decreasing within (0, T)"));
    }
    if n_reps == 0 {
        return Err(param("n_reps must be positive"));
    }
    let rows = map_indexed(n_reps, |rep| -> Result<Vec<f64>> {
        let path = source(rep as u64)?;
        Ok(radii.iter().map(|&r| global_modulus(&path, r)).collect())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let h = spec.effective_hurst();
    let correction = LogCorrection::log(iota);
    let fit = build_fit(FitInput {
        radii,
        per_replication: rows,
        used: vec![true; radii.len()],
        aggregate: Aggregate::Max,
        log_correction: correction,
        expected: h,
        bootstrap: 200,
        seed: spec.seed,
    });
    let ratios: Vec<f64> = radii.iter().zip(&fit.statistics).map(|(&r, &m)| m / (r.powf(h) * correction.factor(r))).collect();
    let med = stats::median(&ratios);
    let spread = stats::quantile(&ratios, 0.9) / med;
    Ok(ModulusFit { fit, iota, bounded: spread < max_spread && med > 0.0, ratios, spread })
}

/// `max_{|i−j| ≤ k} ‖X_i − X_j‖` with `k` the number of grid steps in `r`.
pub fn global_modulus(path: &SamplePath, r: f64) -> f64 {
    let dt = path.horizon() / path.n_steps() as f64;
    let k = ((r / dt).round() as usize).max(1);
    if path.dim() == 1 {
        return sliding_range(path.positions(), k + 1);
    }
    let n = path.len();
    let mut best = 0.0f64;
    for i in 0..n {
        let p = path.point(i);
        for j in i + 1..(i + k + 1).min(n) {
            best = best.max(dist2(p, path.point(j)));
        }
    }
    best.sqrt()
}

/// Largest `max − min` over windows of `width` consecutive values.
fn sliding_range(xs: &[f64], width: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        while maxq.back().is_some_and(|&j| xs[j] <= x) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| xs[j] >= x) {
            minq.pop_back();
        }
        minq.push_back(i);
        let lo = (i + 1).saturating_sub(width);
        while maxq.front().is_some_and(|&j| j < lo) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < lo) {
            minq.pop_front();
        }
        best = best.max(xs[maxq[0]] - xs[minq[0]]);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub gamma1: f64,
    pub gamma2: f64,
    pub target1: f64,
    pub target2: f64,
    pub spatial: ScalingFit,
    pub temporal: ScalingFit,
}

impl HolderEstimate {
    pub fn spatial_ok(&self) -> bool {
        self.gamma1 >= 0.9 * self.target1
    }

    pub fn temporal_ok(&self) -> bool {
        self.gamma2 >= 0.9 * self.target2
    }
}

/// Empirical joint Hölder exponents of `(x, t) ↦ L^{α,X}(x, [0, t])`.
///
/// `x_grid` must be evenly spaced along a line; `t_grid` evenly spaced in
/// `(0, T]`. Increments are taken over dyadic multiples of the grid spacings
/// and the largest increment per lag (over points and replications) is fitted.
pub fn potential_field_holder(
    spec: &ProcessSpec,
    alpha: f64,
    beta_incr: f64,
    x_grid: &[Vec<f64>],
    t_grid: &[f64],
    n_reps: usize,
) -> Result<HolderEstimate> {
    let adm = admissible_for(spec, alpha, Some(beta_incr))?;
    let sampler = Sampler::new(spec)?;
    let source = |rep: u64| sampler.sample(rep);
    let target2 = adm.map_or(1.0, |a| a.time_exponent());
    potential_field_holder_with(&source, spec, alpha, beta_incr, target2, x_grid, t_grid, n_reps)
}

#[allow(clippy::too_many_arguments)]
pub fn potential_field_holder_with(
    source: &PathSource<'_>,
    spec: &ProcessSpec,
    alpha: f64,
    beta_incr: f64,
    target2: f64,
    x_grid: &[Vec<f64>],
    t_grid: &[f64],
    n_reps: usize,
) -> Result<HolderEstimate> {
    if x_grid.len() < 3 || t_grid.len() < 3 {
        return Err(param("need at least 3 spatial and 3 temporal grid points"));
    }
    if !(alpha > 0.0 && alpha < spec.dim as f64) {
        return Err(param(format!("alpha = {alpha} outside (0, d)")));
    }
    let fields = map_indexed(n_reps, |rep| potential_field(&source(rep as u64)?, alpha, x_grid, t_grid))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let lags = |n: usize| -> Vec<usize> { (0..).map(|j| 1usize << j).take_while(|&m| m < n).collect() };

    let t_lags = lags(t_grid.len());
    let dt = t_grid[1] - t_grid[0];
    let temporal_rows: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| {
            t_lags
                .iter()
                .rev()
                .map(|&m| {
                    f.iter()
                        .flat_map(|row| row.windows(m + 1).map(|w| (w[m] - w[0]).abs()))
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    let t_radii: Vec<f64> = t_lags.iter().rev().map(|&m| m as f64 * dt).collect();

    let x_lags = lags(x_grid.len());
    let dx = dist(&x_grid[0], &x_grid[1]);
    let spatial_rows: Vec<Vec<f64>> = fields
        .iter()
        .map(|f| {
            let last: Vec<f64> = f.iter().map(|row| row[row.len() - 1]).collect();
            x_lags
                .iter()
                .rev()
                .map(|&m| last.windows(m + 1).map(|w| (w[m] - w[0]).abs()).fold(0.0, f64::max))
                .collect()
        })
        .collect();
    let x_radii: Vec<f64> = x_lags.iter().rev().map(|&m| m as f64 * dx).collect();

    let mk = |radii: &[f64], rows: Vec<Vec<f64>>, expected: f64| {
        build_fit(FitInput {
            radii,
            used: vec![true; radii.len()],
            per_replication: rows,
            aggregate: Aggregate::Max,
            log_correction: LogCorrection::none(),
            expected,
            bootstrap: 200,
            seed: spec.seed,
        })
    };
    let temporal = mk(&t_radii, temporal_rows, target2);
    let spatial = mk(&x_radii, spatial_rows, beta_incr);
    Ok(HolderEstimate {
        gamma1: spatial.slope,
        gamma2: temporal.slope,
        target1: beta_incr,
        target2,
        spatial,
        temporal,
    })
}

/// `field[i][j] = L^{α,X}(x_i, [0, t_j])` by cumulative trapezoidal sums of
/// the per-atom kernel.
pub fn potential_field(path: &SamplePath, alpha: f64, x_grid: &[Vec<f64>], t_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let occ = OccupationMeasure::new(path, 0.0, path.horizon())?;
    let kernel = AtomKernel::new(&occ, alpha, BallModel::default());
    let c = rescaling_factor(alpha, path.dim());
    let idx: Vec<usize> = t_grid.iter().map(|&t| path.nearest_index(t)).collect();
    x_grid
        .iter()
        .map(|x| {
            if x.len() != path.dim() {
                return Err(param("grid point dimension differs from the path"));
            }
            let mut out = Vec::with_capacity(idx.len());
            let mut acc = 0.0;
            let mut prev = kernel.eval(dist2(path.point(0), x));
            let mut j = 0;
            for (i, &target) in idx.iter().enumerate() {
                while j < target {
                    let next = kernel.eval(dist2(path.point(j + 1), x));
                    acc += 0.5 * (path.times()[j + 1] - path.times()[j]) * (prev + next);
                    prev = next;
                    j += 1;
                }
                let _ = i;
                out.push(c * acc);
            }
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sliding_range_matches_brute_force() {
        let xs = [0.0, 3.0, -1.0, 2.0, 5.0, 4.0, -2.0, 0.5];
        for w in 1..=xs.len() {
            let brute = xs
                .windows(w)
                .map(|s| s.iter().copied().fold(f64::MIN, f64::max) - s.iter().copied().fold(f64::MAX, f64::min))
                .fold(0.0, f64::max);
            assert_eq!(sliding_range(&xs, w), brute);
        }
    }

    #[test]
    fn linear_stub_modulus_is_two_r() {
        let spec = ProcessSpec::linear(1, 1 << 12);
        let path = Sampler::new(&spec).unwrap().sample(0).unwrap();
        let m = global_modulus(&path, 0.125);
        assert!((m - 0.125).abs() < 1e-12);
        assert!((oscillation(&path, 0.5, 0.125) - 0.125).abs() < 1e-3);
        let md = modulus_of_continuity(&spec, &dyadic_radii(3, 10), 1, 3.0).unwrap();
        assert!(md.ratios.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn constant_stub_field_is_linear_in_time() {
        let spec = ProcessSpec::constant(1, 1 << 10);
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![0.5 + 0.1 * i as f64]).collect();
        let ts: Vec<f64> = (1..=16).map(|k| k as f64 / 16.0).collect();
        let est = potential_field_holder(&spec, 0.5, 0.5, &xs, &ts, 1).unwrap();
        assert!((est.gamma2 - 1.0).abs() < 1e-9, "{}", est.gamma2);
    }

    #[test]
    fn inadmissible_parameters_are_rejected() {
        let spec = ProcessSpec::fbm(0.6, 2, 1 << 8);
        let err = sup_l_scaling(&spec, 0.0, 0.5, &[0.1], 1, &SupScalingOptions::default()).unwrap_err();
        assert!(err.to_string().contains("d - 1/H"));
    }
}
