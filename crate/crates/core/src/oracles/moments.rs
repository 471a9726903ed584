//! Moment growth and tail decay of increments and potentials.

use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::function::gamma::ln_gamma;

use super::analytic::zeta_for;
use super::BoundReport;
use crate::error::{param, Result};
use crate::occupation::{local_time_at, rescaled_potential, OccupationMeasure};
use crate::par::map_indexed;
use crate::process_sim::path::dist;
use crate::process_sim::{ProcessKind, ProcessSpec, Sampler};
use crate::regularity::admissible_for;
use crate::stats;

/// Slope of `log r(p)` vs `log p` above which moment growth is flagged.
pub const TREND_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentRoute {
    /// Gaussian increments: `E‖Z‖^p = 2^{p/2} Γ((d+p)/2) / Γ(d/2)` times `τ^{Hp}`.
    Exact,
    MonteCarlo,
}

/// `r(p) = (E‖X_τ − X_0‖^p)^{1/p} / (p^ι τ^H)`, maximized over the lags
/// `τ ∈ {T/2, T/4, T/8}`.
pub fn normalized_moments(spec: &ProcessSpec, p_grid: &[f64], n_reps: usize, iota: f64) -> Result<(MomentRoute, Vec<f64>)> {
    if p_grid.iter().any(|&p| !(1.0..=12.0).contains(&p)) {
        return Err(param("moment orders must lie in [1, 12]"));
    }
    let h = spec.effective_hurst();
    let d = spec.dim as f64;
    if matches!(spec.kind, ProcessKind::Fbm | ProcessKind::Brownian) {
        let r = p_grid
            .iter()
            .map(|&p| {
                let log_m = 0.5 * p * 2f64.ln() + ln_gamma(0.5 * (d + p)) - ln_gamma(0.5 * d);
                (log_m / p).exp() / p.powf(iota)
            })
            .collect();
        return Ok((MomentRoute::Exact, r));
    }
    if n_reps < 2 {
        return Err(param("Monte Carlo moments need at least 2 replications"));
    }
    let sampler = Sampler::new(spec)?;
    let lags = [2usize, 4, 8];
    let norms: Vec<Vec<f64>> = map_indexed(n_reps, |rep| -> Result<Vec<f64>> {
        let path = sampler.sample(rep as u64)?;
        let n = path.n_steps();
        Ok(lags.iter().map(|&k| dist(path.point(n / k), path.point(0))).collect())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let r = p_grid
        .iter()
        .map(|&p| {
            lags.iter()
                .enumerate()
                .map(|(i, &k)| {
                    let tau = spec.horizon / k as f64;
                    let m = norms.iter().map(|v| v[i].powf(p)).sum::<f64>() / n_reps as f64;
                    m.powf(1.0 / p) / (p.powf(iota) * tau.powf(h))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok((MomentRoute::MonteCarlo, r))
}

/// Checks `E‖X_t − X_s‖^p ≤ c_1^p p^{ιp} |t−s|^{Hp}` over `p_grid`.
///
/// Reports `c1 = max_p r(p)`. A bound that fails for every `c_1` shows up as
/// growth of `r(p)`: the check flags a violation when the log-log slope of
/// `r` over the upper half of the grid exceeds [`TREND_TOLERANCE`], and
/// `worst_ratio` is the largest upper-half value over the largest lower-half
/// value.
pub fn moment_bound_check(spec: &ProcessSpec, p_grid: &[f64], n_reps: usize, iota: Option<f64>) -> Result<BoundReport> {
    if p_grid.len() < 4 || p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(param("p_grid needs at least 4 increasing orders"));
    }
    let iota = iota.unwrap_or_else(|| spec.iota());
    let mut report = BoundReport::new("moment_bound");
    if let (ProcessKind::StableSym, Some(beta)) = (spec.kind, spec.beta_stable) {
        if beta < 2.0 {
            let bad: Vec<f64> = p_grid.iter().copied().filter(|&p| p >= beta).collect();
            report.violations = bad.len();
            report.worst_ratio = f64::INFINITY;
            report.notes.push(format!("stable increments have no moment of order ≥ {beta}: {bad:?}"));
            return Ok(report);
        }
    }
    let (route, r) = normalized_moments(spec, p_grid, n_reps, iota)?;
    let half = p_grid.len() / 2;
    let lower = r[..half].iter().copied().fold(0.0, f64::max);
    let upper = r[half..].iter().copied().fold(0.0, f64::max);
    let lp: Vec<f64> = p_grid[half..].iter().map(|p| p.ln()).collect();
    let lr: Vec<f64> = r[half..].iter().map(|v| v.ln()).collect();
    let trend = if lr.iter().all(|v| v.is_finite()) { stats::ols(&lp, &lr).slope } else { 0.0 };
    report.n_configs = p_grid.len();
    report.worst_ratio = if lower > 0.0 { upper / lower } else { 0.0 };
    if trend > TREND_TOLERANCE || r.iter().any(|v| !v.is_finite()) {
        report.violations = 1;
    }
    report.constants.insert("c1".into(), r.iter().copied().fold(0.0, f64::max));
    report.constants.insert("iota".into(), iota);
    report.constants.insert("trend".into(), trend);
    report.witness = json!({ "p": p_grid, "normalized": r, "route": route });
    if route == MomentRoute::MonteCarlo {
        report.notes.push(format!("Monte Carlo over {n_reps} paths, lags T/2, T/4, T/8"));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    /// Base point `x` (origin when absent).
    pub x: Option<Vec<f64>>,
    /// Also run with `x + X_τ`, `τ` the interval midpoint.
    pub shifted: bool,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { x: None, shifted: true }
    }
}

/// Empirical survival of `Y = L^{α,X}(x, I) / (|I|^{1−H(d−α)} [log(e+|I|)]^{2dζ})`
/// at thresholds `u^{H(θ+d−α)}`; `log P(Y ≥ ·)` must decay at least linearly
/// in `u` (fitted slope negative with a 95% interval excluding 0).
pub fn tail_bound_check(
    spec: &ProcessSpec,
    alpha: f64,
    interval: (f64, f64),
    u_grid: &[f64],
    n_reps: usize,
    opts: &TailOptions,
) -> Result<BoundReport> {
    admissible_for(spec, alpha, None)?;
    let (s, t) = interval;
    if !(0.0 <= s && s < t && t <= spec.horizon) {
        return Err(param(format!("interval [{s}, {t}] outside [0, {}]", spec.horizon)));
    }
    if u_grid.len() < 3 || u_grid.iter().any(|&u| !(u > 0.0)) {
        return Err(param("u_grid needs at least 3 positive thresholds"));
    }
    let d = spec.dim as f64;
    let h = spec.effective_hurst();
    let len = t - s;
    let zeta = zeta_for(0.0, alpha);
    let norm = len.powf(1.0 - h * (d - alpha)) * (std::f64::consts::E + len).ln().powf(2.0 * d * zeta);
    let x0 = opts.x.clone().unwrap_or_else(|| vec![0.0; spec.dim]);
    let sampler = Sampler::new(spec)?;
    let samples: Vec<(f64, f64)> = map_indexed(n_reps, |rep| -> Result<(f64, f64)> {
        let path = sampler.sample(rep as u64)?;
        let occ = OccupationMeasure::new(&path, s, t)?;
        let eval = |x: &[f64]| -> Result<f64> {
            if alpha == 0.0 {
                let bin = (spec.horizon / spec.n_steps as f64).powf(h);
                local_time_at(&occ, x, bin)
            } else {
                Ok(rescaled_potential(&occ, alpha, x)?.value)
            }
        };
        let plain = eval(&x0)?;
        let shifted = if opts.shifted {
            let mut xt = vec![0.0; spec.dim];
            path.interpolate(0.5 * (s + t), &mut xt);
            let x: Vec<f64> = x0.iter().zip(&xt).map(|(a, b)| a + b).collect();
            eval(&x)?
        } else {
            f64::NAN
        };
        Ok((plain / norm, shifted / norm))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let power = h * (spec.theta() + d - alpha);
    let mut report = BoundReport::new("tail_bound");
    report.n_configs = n_reps;
    let mut witness = serde_json::Map::new();
    let mut arms = vec![("plain", samples.iter().map(|p| p.0).collect::<Vec<_>>())];
    if opts.shifted {
        arms.push(("shifted", samples.iter().map(|p| p.1).collect()));
    }
    for (name, ys) in arms {
        let survival: Vec<f64> = u_grid
            .iter()
            .map(|&u| {
                let q = u.powf(power);
                ys.iter().filter(|&&y| y >= q).count() as f64 / ys.len() as f64
            })
            .collect();
        report.worst_ratio = report.worst_ratio.max(survival.iter().copied().fold(0.0, f64::max));
        let pts: Vec<(f64, f64)> = u_grid.iter().zip(&survival).filter(|(_, &p)| p > 0.0).map(|(&u, &p)| (u, p.ln())).collect();
        let (slope, half_width) = if pts.len() >= 3 {
            let fit = stats::ols(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>());
            (fit.slope, 1.96 * fit.slope_se)
        } else {
            (f64::NAN, f64::NAN)
        };
        let decays = slope < 0.0 && slope + half_width < 0.0;
        if !decays {
            report.violations += 1;
            report.notes.push(format!("{name}: no significant decay (slope {slope}, {} positive points)", pts.len()));
        }
        report.constants.insert(format!("{name}_slope"), slope);
        report.constants.insert(format!("{name}_ci_lo"), slope - half_width);
        report.constants.insert(format!("{name}_ci_hi"), slope + half_width);
        report.constants.insert(format!("{name}_c11"), -slope);
        witness.insert(name.into(), json!({ "u": u_grid, "survival": survival }));
    }
    report.constants.insert("zeta".into(), zeta);
    report.witness = serde_json::Value::Object(witness);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_moment_of_fbm_is_exact() {
        let spec = ProcessSpec::fbm(0.3, 1, 1 << 8);
        let (route, r) = normalized_moments(&spec, &[2.0], 0, 0.0).unwrap();
        assert_eq!(route, MomentRoute::Exact);
        assert!((r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moments_need_iota_one_half() {
        let grid: Vec<f64> = (1..=12).map(f64::from).collect();
        let ok = moment_bound_check(&ProcessSpec::brownian(2, 1 << 8), &grid, 0, None).unwrap();
        assert!(ok.passed(), "{ok:?}");
        let bad = moment_bound_check(&ProcessSpec::brownian(2, 1 << 8), &grid, 0, Some(0.0)).unwrap();
        assert!(bad.violations > 0);
    }

    #[test]
    fn stable_moments_are_infinite() {
        let spec = ProcessSpec::stable(1.5, 1, 1 << 8);
        let rep = moment_bound_check(&spec, &[1.0, 1.2, 2.0, 3.0], 10, None).unwrap();
        assert_eq!(rep.violations, 2);
    }
}
