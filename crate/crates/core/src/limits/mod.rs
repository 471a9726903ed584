//! Small-parameter limits of potentials and average densities.

pub mod kernel;

pub use kernel::{kernel_identities, kernel_k_eps, kernel_mass_beyond, AveragingKernelParams, KernelIdentityReport};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::occupation::potential::{averaged_ball_mass, potential_with, rescaling_factor, BallModel};
use crate::occupation::OccupationMeasure;
use crate::stats;

pub fn default_small_grid() -> Vec<f64> {
    (2..=9).map(|k| 0.5f64.powi(k)).collect()
}

pub fn default_u_grid() -> Vec<f64> {
    (4..=16).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    AlphaToZero,
    AverageDensity,
    VaryingOrder,
}

/// Raw sequence of a small-parameter limit with its extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityLimitReport {
    pub kind: LimitKind,
    pub x: Vec<f64>,
    pub s_order: Option<f64>,
    pub parameter_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Relative difference of the last two values used for stability.
    pub stability: f64,
    pub max_successive_diff: f64,
    /// Radius below which ball masses come from the local model.
    pub resolution_radius: f64,
    /// Whether each grid entry is resolved by the sampled path (`u ≥ ρ`
    /// for average densities; always true for potential limits).
    pub resolved: Vec<bool>,
    /// Reference value computed by an independent route, when requested.
    pub reference: Option<f64>,
    pub failed: bool,
}

impl DensityLimitReport {
    pub fn relative_gap_to_reference(&self) -> Option<f64> {
        self.reference.map(|r| (self.limit - r).abs() / r.abs())
    }
}

fn check_decreasing(grid: &[f64], upper: f64, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(param(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(param(format!("{what} grid must be strictly decreasing")));
    }
    if grid.iter().any(|&v| !(v > 0.0 && v < upper)) {
        return Err(param(format!("{what} grid must lie in (0, {upper})")));
    }
    Ok(())
}

/// Polynomial extrapolation to `p = 0` through the last (up to three) points.
pub fn extrapolate_to_zero(params: &[f64], values: &[f64]) -> f64 {
    let k = params.len().min(3);
    let (ps, vs) = (&params[params.len() - k..], &values[values.len() - k..]);
    // Neville's scheme evaluated at 0.
    let mut p = vs.to_vec();
    for m in 1..k {
        for i in 0..k - m {
            p[i] = (ps[i + m] * p[i] - ps[i] * p[i + 1]) / (ps[i + m] - ps[i]);
        }
    }
    p[0]
}

fn sequence_metrics(values: &[f64], resolved: &[bool]) -> (f64, f64) {
    let max_diff = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let used: Vec<f64> = values.iter().zip(resolved).filter(|(_, &r)| r).map(|(&v, _)| v).collect();
    let stability = match used.as_slice() {
        [.., a, b] => (b - a).abs() / b.abs().max(f64::MIN_POSITIVE),
        _ => f64::NAN,
    };
    (stability, max_diff)
}

fn report(
    kind: LimitKind,
    occ: &OccupationMeasure<'_>,
    x: &[f64],
    s_order: Option<f64>,
    grid: &[f64],
    values: Vec<f64>,
    limit: f64,
    resolved: Vec<bool>,
) -> DensityLimitReport {
    let failed = values.iter().any(|v| !v.is_finite()) || !limit.is_finite();
    let (stability, max_successive_diff) = sequence_metrics(&values, &resolved);
    DensityLimitReport {
        kind,
        x: x.to_vec(),
        s_order,
        parameter_grid: grid.to_vec(),
        values,
        limit,
        stability,
        max_successive_diff,
        resolution_radius: occ.step_scale(),
        resolved,
        reference: None,
        failed,
    }
}

/// `(α/(dω_d)) U^α μ(x)` along a decreasing `α` grid, extrapolated to `α = 0`.
/// The ball model uses local dimension `d`, the dimension of an absolutely
/// continuous measure.
pub fn potential_limit_alpha_to_zero(occ: &OccupationMeasure<'_>, x: &[f64], alpha_grid: &[f64]) -> Result<DensityLimitReport> {
    let dim = occ.dim();
    check_decreasing(alpha_grid, dim as f64, "alpha")?;
    let model = BallModel::with_local_dim(dim as f64).averaged();
    let values = alpha_grid
        .iter()
        .map(|&a| Ok(potential_with(occ, a, x, model)?.value * rescaling_factor(a, dim)))
        .collect::<Result<Vec<_>>>()?;
    let limit = extrapolate_to_zero(alpha_grid, &values);
    Ok(report(LimitKind::AlphaToZero, occ, x, None, alpha_grid, values, limit, vec![true; alpha_grid.len()]))
}

/// `ε U^{d−s+ε} μ(x)` along a decreasing `ε` grid, extrapolated to `ε = 0`,
/// with `s · D_a^s μ(x)` from [`average_density`] as reference.
pub fn potential_limit_varying_order(
    occ: &OccupationMeasure<'_>,
    s_order: f64,
    x: &[f64],
    eps_grid: &[f64],
) -> Result<DensityLimitReport> {
    let d = occ.dim() as f64;
    check_order(s_order, d)?;
    check_decreasing(eps_grid, s_order, "eps")?;
    let model = BallModel::with_local_dim(s_order).averaged();
    let values = eps_grid
        .iter()
        .map(|&e| Ok(e * potential_with(occ, d - s_order + e, x, model)?.value))
        .collect::<Result<Vec<_>>>()?;
    let limit = extrapolate_to_zero(eps_grid, &values);
    let mut rep = report(LimitKind::VaryingOrder, occ, x, Some(s_order), eps_grid, values, limit, vec![true; eps_grid.len()]);
    rep.reference = Some(s_order * average_density(occ, s_order, x, &default_u_grid())?.limit);
    Ok(rep)
}

fn check_order(s_order: f64, d: f64) -> Result<()> {
    if !(s_order > 0.0 && s_order <= d) {
        return Err(param(format!("s = {s_order} outside (0, {d}]")));
    }
    Ok(())
}

/// Ball masses `r ↦ μ(B(x, r))` from exact weighted counting, with the
/// resolution-scale mass `m(ρ)` continued as `m(ρ)(r/ρ)^s` below the
/// resolution radius `ρ`.
struct BallMasses {
    profile: crate::occupation::DistanceProfile,
    rho: f64,
    m_rho: f64,
    s: f64,
}

impl BallMasses {
    fn new(occ: &OccupationMeasure<'_>, x: &[f64], s: f64) -> Self {
        let profile = occ.distance_profile(x);
        let rho = occ.step_scale();
        let near: Vec<(f64, f64)> = profile.atoms().take_while(|&(d, _)| d < 6.0 * rho).map(|(d, w)| (d * d, w)).collect();
        let m_rho = averaged_ball_mass(&near, rho, s);
        Self { profile, rho, m_rho, s }
    }

    fn mass(&self, r: f64) -> f64 {
        if r >= self.rho {
            self.profile.mass_within(r)
        } else {
            self.m_rho * (r / self.rho).powf(self.s)
        }
    }

    /// `∫_u^1 m(r) r^{−s−1} dr` in closed form.
    fn log_integral(&self, u: f64) -> f64 {
        let s = self.s;
        let lo = u.max(self.rho);
        let mut acc = 0.0;
        if lo < 1.0 {
            // Each atom enters the ball of radius r with the shell fraction
            // φ_r(d) = clamp(3/2 − d/r, 0, 1); hard counting makes r ↦ m(r) a
            // staircase whose steps the extrapolation in 1/|log u| amplifies.
            let full = |r: f64| -r.powf(-s) / s;
            for (d, w) in self.profile.atoms() {
                let (a, b) = (2.0 * d / 3.0, 2.0 * d);
                if a >= 1.0 {
                    break;
                }
                let ramp = |r: f64| -1.5 * r.powf(-s) / s + d * r.powf(-s - 1.0) / (s + 1.0);
                let (r0, r1) = (a.max(lo), b.min(1.0));
                if r0 < r1 {
                    acc += w * (ramp(r1) - ramp(r0));
                }
                let r0 = b.max(lo);
                if r0 < 1.0 {
                    acc += w * (full(1.0) - full(r0));
                }
            }
        }
        if u < self.rho {
            acc += self.m_rho * self.rho.powf(-s) * (self.rho.min(1.0) / u).ln();
        }
        acc
    }
}

/// Average `s`-density `(1/|log u|) ∫_u^1 μ(B(x,r)) r^{−s−1} dr` on a
/// decreasing `u` grid, extrapolated linearly in `1/|log u|`.
pub fn average_density(occ: &OccupationMeasure<'_>, s_order: f64, x: &[f64], u_grid: &[f64]) -> Result<DensityLimitReport> {
    check_order(s_order, occ.dim() as f64)?;
    check_decreasing(u_grid, 1.0, "u")?;
    let masses = BallMasses::new(occ, x, s_order);
    let values: Vec<f64> = u_grid.iter().map(|&u| masses.log_integral(u) / -u.ln()).collect();
    let resolved: Vec<bool> = u_grid.iter().map(|&u| u >= masses.rho).collect();
    // Extrapolate from resolved radii only: below ρ the values come from the
    // continuation model, which would make the limit a restatement of it.
    let (xs, ys): (Vec<f64>, Vec<f64>) = u_grid
        .iter()
        .zip(&values)
        .zip(&resolved)
        .filter(|(_, &r)| r)
        .map(|((&u, &v), _)| (-1.0 / u.ln(), v))
        .unzip();
    let n = xs.len();
    let limit = if n >= 2 {
        extrapolate_to_zero(&xs[n - 2..], &ys[n - 2..])
    } else {
        f64::NAN
    };
    Ok(report(LimitKind::AverageDensity, occ, x, Some(s_order), u_grid, values, limit, resolved))
}

/// Octave-wise ratios `m(r)/r^s` over resolved octaves `[2^{-k-1}, 2^{-k}]`
/// averaged in `log r`; used to compare the density level between points.
pub fn octave_density_ratios(occ: &OccupationMeasure<'_>, s_order: f64, x: &[f64], octaves: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    let masses = BallMasses::new(occ, x, s_order);
    octaves
        .filter(|&k| 0.5f64.powi(k + 1) >= masses.rho)
        .map(|k| {
            let (a, b) = (0.5f64.powi(k + 1), 0.5f64.powi(k));
            let pts = 8;
            (0..pts)
                .map(|j| {
                    let r = a * (b / a).powf((j as f64 + 0.5) / pts as f64);
                    masses.mass(r) / r.powf(s_order)
                })
                .sum::<f64>()
                / pts as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallMassEnvelope {
    pub x: Vec<f64>,
    pub s_order: f64,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub resolved: Vec<bool>,
    pub sup: f64,
    /// OLS slope of `log ratio` against `log r` over resolved radii; a
    /// clearly negative value means the ratio grows as `r → 0`.
    pub trend: f64,
    /// Ratios increase strictly as `r` decreases over all resolved radii and
    /// the smallest-radius ratio exceeds the largest-radius one tenfold.
    pub diverging: bool,
}

/// `m_x(r) / (r^s |log r|)` for `r ∈ {2^{-k}}`.
pub fn ball_mass_envelope(occ: &OccupationMeasure<'_>, x: &[f64], s_order: f64, ks: std::ops::RangeInclusive<i32>) -> Result<BallMassEnvelope> {
    check_order(s_order, occ.dim() as f64)?;
    let profile = occ.distance_profile(x);
    let rho = occ.step_scale();
    let radii: Vec<f64> = ks.map(|k| 0.5f64.powi(k)).collect();
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| profile.mass_within(r) / (r.powf(s_order) * -r.ln()))
        .collect();
    let resolved: Vec<bool> = radii.iter().map(|&r| r >= rho).collect();
    let (lr, lq): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&ratios)
        .zip(&resolved)
        .filter(|((_, q), &ok)| ok && **q > 0.0)
        .map(|((r, q), _)| (r.ln(), q.ln()))
        .unzip();
    let trend = if lr.len() >= 2 { stats::ols(&lr, &lq).slope } else { f64::NAN };
    let used: Vec<f64> = ratios.iter().zip(&resolved).filter(|(_, &ok)| ok).map(|(&q, _)| q).collect();
    let diverging = used.len() >= 2
        && used.windows(2).all(|w| w[1] > w[0])
        && used[used.len() - 1] > 10.0 * used[0];
    let sup = used.iter().copied().fold(0.0, f64::max);
    Ok(BallMassEnvelope { x: x.to_vec(), s_order, radii, ratios, resolved, sup, trend, diverging })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupation::occupation_measure;
    use crate::process_sim::SamplePath;

    fn line(n: usize) -> SamplePath {
        SamplePath::from_fn(n, 1.0, 1, Some(1.0), |_, t, x| x[0] = t).unwrap()
    }

    #[test]
    fn neville_is_exact_for_quadratics() {
        let ps = [0.4, 0.2, 0.1];
        let vs: Vec<f64> = ps.iter().map(|p| 3.0 - p + 2.0 * p * p).collect();
        assert!((extrapolate_to_zero(&ps, &vs) - 3.0).abs() < 1e-12);
        assert!((extrapolate_to_zero(&[0.5, 0.25], &[2.0, 1.5]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_density_is_one() {
        let p = line(1 << 16);
        let m = occupation_measure(&p, 0.0, 1.0).unwrap();
        let r = potential_limit_alpha_to_zero(&m, &[0.5], &default_small_grid()).unwrap();
        assert!((r.limit - 1.0).abs() < 1e-2, "{r:?}");
        let off = potential_limit_alpha_to_zero(&m, &[1.2], &default_small_grid()).unwrap();
        assert!(off.limit.abs() < 1e-3, "{}", off.limit);
    }

    #[test]
    fn line_average_density_is_two() {
        let p = line(1 << 16);
        let m = occupation_measure(&p, 0.0, 1.0).unwrap();
        let r = average_density(&m, 1.0, &[0.5], &default_u_grid()).unwrap();
        // Residual staircase of the atoms at the finest resolved radius.
        assert!((r.limit - 2.0).abs() < 5e-3, "{r:?}");
        let off = average_density(&m, 1.0, &[1.5], &default_u_grid()).unwrap();
        assert!(off.limit.abs() < 1e-9);
        let v = potential_limit_varying_order(&m, 1.0, &[0.5], &default_small_grid()).unwrap();
        assert!((v.limit - 2.0).abs() < 2e-2, "{v:?}");
        assert!(v.relative_gap_to_reference().unwrap() < 2e-2);
    }

    #[test]
    fn envelope_of_line_decays() {
        let p = line(1 << 16);
        let m = occupation_measure(&p, 0.0, 1.0).unwrap();
        let e = ball_mass_envelope(&m, &[0.5], 1.0, 2..=8).unwrap();
        assert!(e.trend > 0.0);
        assert!(!e.diverging);
        for (r, q) in e.radii.iter().zip(&e.ratios) {
            assert!((q * -r.ln() / 2.0 - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn grids_are_validated() {
        let p = line(64);
        let m = occupation_measure(&p, 0.0, 1.0).unwrap();
        assert!(potential_limit_alpha_to_zero(&m, &[0.5], &[0.1, 0.2]).is_err());
        assert!(average_density(&m, 1.0, &[0.5], &[1.5]).is_err());
        assert!(potential_limit_varying_order(&m, 1.0, &[0.5], &[1.0]).is_err());
    }
}
