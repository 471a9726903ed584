//! Riesz potentials `U^α μ(x) = Σ_i w_i ‖x − X_i‖^{α−d}` of occupation
//! measures, with a local ball model for the samples closest to `x`.
//!
//! Samples within the singular radius `ρ` of `x` (twice the median step of
//! the path) are not summed pointwise. Their mass `m(ρ)` is spread as `m(r) = m(ρ)(r/ρ)^s` for `r ≤ ρ`, where `s`
//! is the local dimension of the path (`min(d, 1/H)` by default), giving the
//! closed-form contribution `m(ρ) ρ^{α−d} s / (s + α − d)`. The integral
//! diverges exactly when `s + α ≤ d`.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::occupation::measure::OccupationMeasure;
use crate::process_sim::path::dist2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialEstimate {
    pub value: f64,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub interval: (f64, f64),
    pub err_bound: f64,
    pub singular_corrected: bool,
    /// `H(d − α) ≥ 1`: the integral is not expected to be finite.
    pub divergent: bool,
}

/// Fraction of an atom at distance `r` counted inside the singular ball of
/// radius `ρ`: 1 below `ρ/2`, 0 above `3ρ/2`, linear in between. The
/// shell is about one atom spacing wide even on smooth paths, so the blended
/// count does not jump as `x` moves between samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ShellWeight {
    lo2: f64,
    hi2: f64,
    lo: f64,
    width: f64,
}

impl ShellWeight {
    pub(crate) fn new(rho: f64) -> Self {
        let (lo, hi) = (0.5 * rho, 1.5 * rho);
        Self { lo2: lo * lo, hi2: hi * hi, lo, width: hi - lo }
    }

    pub(crate) fn inner_fraction(&self, r2: f64) -> f64 {
        if r2 >= self.hi2 {
            0.0
        } else if r2 < self.lo2 {
            1.0
        } else {
            1.0 - (r2.sqrt() - self.lo) / self.width
        }
    }
}

/// Per-atom kernel with the ball model folded in: an atom at distance `r`
/// contributes `(1 − φ(r)) r^{α−d} + φ(r) ρ^{α−d} s/(s + α − d)`, where `φ` is
/// the shell fraction. Contributions add over atoms, so windowed sums can be
/// accumulated incrementally.
#[derive(Debug, Clone, Copy)]
pub struct AtomKernel {
    expo: f64,
    shell: ShellWeight,
    inner_value: f64,
    pub divergent: bool,
}

impl AtomKernel {
    pub fn new(occ: &OccupationMeasure<'_>, alpha: f64, model: BallModel) -> Self {
        let d = occ.dim() as f64;
        let s = model.resolve(occ);
        let rho = occ.step_scale();
        let gap = s + alpha - d;
        let divergent = gap <= 0.0;
        let inner_value = if divergent { f64::INFINITY } else { rho.powf(alpha - d) * s / gap };
        Self { expo: 0.5 * (alpha - d), shell: ShellWeight::new(rho), inner_value, divergent }
    }

    /// Kernel value at squared distance `r2`.
    pub fn eval(&self, r2: f64) -> f64 {
        let phi = self.shell.inner_fraction(r2);
        if phi == 0.0 {
            r2.powf(self.expo)
        } else if phi == 1.0 {
            self.inner_value
        } else {
            (1.0 - phi) * r2.powf(self.expo) + phi * self.inner_value
        }
    }
}

/// Overrides for the local ball model.
#[derive(Debug, Clone, Copy, Default)]
pub struct BallModel {
    /// Local dimension `s` of the measure near `x`.
    pub local_dim: Option<f64>,
    /// Take the level `m(ρ)/ρ^s` as a log-r average of blended ball masses
    /// over `[ρ, 4ρ]` instead of the single ball at `ρ`. Lower variance when
    /// the inner contribution dominates (orders close to `d − s`).
    pub averaged_level: bool,
}

impl BallModel {
    pub fn with_local_dim(s: f64) -> Self {
        Self { local_dim: Some(s), averaged_level: false }
    }

    pub fn averaged(self) -> Self {
        Self { averaged_level: true, ..self }
    }

    pub fn resolve(&self, occ: &OccupationMeasure<'_>) -> f64 {
        let d = occ.dim() as f64;
        self.local_dim
            .unwrap_or_else(|| (1.0 / occ.hurst_hint().unwrap_or(1.0)).min(d))
    }
}

/// Volume `ω_d` of the Euclidean unit ball, by `ω_d = 2π/d · ω_{d−2}`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// `α / (d ω_d)`, the factor turning `U^α` into `L^{α,X}`.
pub fn rescaling_factor(alpha: f64, d: usize) -> f64 {
    alpha / (d as f64 * unit_ball_volume(d))
}

pub fn riesz_potential(occ: &OccupationMeasure<'_>, alpha: f64, x: &[f64]) -> Result<PotentialEstimate> {
    let d = occ.dim() as f64;
    if !(alpha > 0.0 && alpha < d) {
        return Err(param(format!("alpha = {alpha} outside (0, {d})")));
    }
    potential_with(occ, alpha, x, BallModel::default())
}

/// `L^{α,X}(x, [s, t]) = α/(d ω_d) · U^α μ_{s,t}(x)`.
pub fn rescaled_potential(occ: &OccupationMeasure<'_>, alpha: f64, x: &[f64]) -> Result<PotentialEstimate> {
    if alpha == 0.0 {
        return Err(Error::AlphaZeroRedirect);
    }
    let mut est = riesz_potential(occ, alpha, x)?;
    let c = rescaling_factor(alpha, occ.dim());
    est.value *= c;
    est.err_bound *= c;
    Ok(est)
}

/// Potential with an explicit ball model; `alpha` may be any value in `(0, d)`
/// including ones very close to 0.
pub fn potential_with(occ: &OccupationMeasure<'_>, alpha: f64, x: &[f64], model: BallModel) -> Result<PotentialEstimate> {
    let dim = occ.dim();
    if x.len() != dim {
        return Err(param(format!("point has {} coordinates, path has {dim}", x.len())));
    }
    let d = dim as f64;
    if !(alpha > 0.0 && alpha < d) {
        return Err(param(format!("alpha = {alpha} outside (0, {d})")));
    }
    let s = model.resolve(occ);
    let expo = 0.5 * (alpha - d);
    let rho = occ.step_scale();
    let shell = ShellWeight::new(rho);

    // Outer kernel values (NaN for atoms entirely inside the ball).
    let mut g = Vec::with_capacity(occ.weights().len());
    let mut outer_w = Vec::with_capacity(occ.weights().len());
    let mut inner_mass = 0.0;
    let mut fine = 0.0;
    let mut near = Vec::new();
    for (j, &w) in occ.weights().iter().enumerate() {
        let p = occ.path().point(occ.first_index() + j);
        let r2 = dist2(p, x);
        if model.averaged_level && r2 < 36.0 * rho * rho {
            near.push((r2, w));
        }
        let phi = shell.inner_fraction(r2);
        inner_mass += w * phi;
        if phi < 1.0 {
            let k = r2.powf(expo);
            fine += w * (1.0 - phi) * k;
            g.push(k);
        } else {
            g.push(f64::NAN);
        }
        outer_w.push(w * (1.0 - phi));
    }

    // Coarse rule: odd-index samples borrow the mean of their even neighbors.
    // Local differences are signed and partly random on rough paths, so their
    // sum can cancel by chance; their root-sum-square is kept as a noise scale.
    let mut coarse = 0.0;
    let mut local_sq = 0.0;
    for (j, &w) in outer_w.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let odd = (occ.first_index() + j) % 2 == 1;
        let k = match (odd, j.checked_sub(1).map(|i| g[i]), g.get(j + 1)) {
            (true, Some(a), Some(&b)) if a.is_finite() && b.is_finite() => 0.5 * (a + b),
            _ => g[j],
        };
        coarse += w * k;
        local_sq += (w * (k - g[j])).powi(2);
    }

    let level_mass = if model.averaged_level { averaged_ball_mass(&near, rho, s) } else { inner_mass };
    let gap = s + alpha - d;
    let divergent = gap <= 0.0;
    let inner = if inner_mass == 0.0 {
        0.0
    } else if divergent {
        f64::INFINITY
    } else {
        level_mass * rho.powf(alpha - d) * s / gap
    };
    let value = fine + inner;
    let err_bound = if value.is_finite() { inner + (fine - coarse).abs() + local_sq.sqrt() } else { f64::INFINITY };
    Ok(PotentialEstimate {
        value,
        alpha,
        x: x.to_vec(),
        interval: occ.interval(),
        err_bound,
        singular_corrected: inner_mass > 0.0,
        divergent,
    })
}

/// `ρ^s` times the log-r average of `m(r)/r^s` over `[ρ, 4ρ]`, with blended
/// ball masses; `near` holds `(squared distance, weight)` for atoms within `6ρ`.
pub(crate) fn averaged_ball_mass(near: &[(f64, f64)], rho: f64, s: f64) -> f64 {
    const K: usize = 32;
    let level = (0..K)
        .map(|k| {
            let r = rho * 4f64.powf((k as f64 + 0.5) / K as f64);
            let shell = ShellWeight::new(r);
            near.iter().map(|&(r2, w)| w * shell.inner_fraction(r2)).sum::<f64>() / r.powf(s)
        })
        .sum::<f64>()
        / K as f64;
    level * rho.powf(s)
}

/// One CSV row per estimate: `alpha,s,t,x_1..x_d,value,err_bound,singular_corrected`.
pub fn write_potential_csv<W: std::io::Write>(mut w: W, estimates: &[PotentialEstimate]) -> Result<()> {
    let dim = estimates.first().map_or(1, |e| e.x.len());
    let cols: Vec<String> = (1..=dim).map(|l| format!("x_{l}")).collect();
    writeln!(w, "alpha,s,t,{},value,err_bound,singular_corrected", cols.join(","))?;
    for e in estimates {
        write!(w, "{:?},{:?},{:?}", e.alpha, e.interval.0, e.interval.1)?;
        for v in &e.x {
            write!(w, ",{v:?}")?;
        }
        writeln!(w, ",{:?},{:?},{}", e.value, e.err_bound, e.singular_corrected)?;
    }
    Ok(())
}
