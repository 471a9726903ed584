//! Closed-form identities and the first maximum principle.

use serde_json::json;
use statrs::function::gamma::ln_gamma;

use super::BoundReport;
use crate::error::{param, Result};
use crate::occupation::{AtomKernel, BallModel, OccupationMeasure};
use crate::par::map_indexed;
use crate::process_sim::path::dist2;
use crate::process_sim::{ProcessSpec, Sampler};
use crate::quad::gauss_legendre;

/// `ψ_γ(s) = s^{−γ}` on `(0, 1)` and `log(e + s)` on `[1, ∞)`.
pub fn psi_gamma(gamma: f64, s: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(param(format!("gamma must be positive, got {gamma}")));
    }
    if !(s > 0.0) {
        return Err(param(format!("psi needs s > 0, got {s}")));
    }
    Ok(if s < 1.0 { s.powf(-gamma) } else { (std::f64::consts::E + s).ln() })
}

/// Logarithmic-factor switch of the moment bounds: 1 if `β < α`, else 0.
pub fn zeta_for(beta: f64, alpha: f64) -> f64 {
    if beta < alpha {
        1.0
    } else {
        0.0
    }
}

/// `∫_{u ≤ t_1 < … < t_n ≤ v} Π_m (t_m − t_{m−1})^{−a} dt` with `t_0 = u`,
/// `length = v − u`. Returns `(closed_form, quadrature)`; the closed form is
/// `Γ(1−a)^n / Γ(n(1−a) + 1) · length^{n(1−a)}` and the quadrature integrates
/// the first gap recursively.
pub fn simplex_beta_integral(n: usize, a: f64, length: f64) -> Result<(f64, f64)> {
    if a >= 1.0 {
        return Err(param(format!("integral diverges for a = {a} ≥ 1")));
    }
    if n == 0 || !(length > 0.0) {
        return Err(param("need n ≥ 1 and a positive length"));
    }
    let b = 1.0 - a;
    let nb = n as f64 * b;
    let closed = (n as f64 * ln_gamma(b) - ln_gamma(nb + 1.0) + nb * length.ln()).exp();
    let quad = if n <= 4 {
        let (x, w) = gauss_legendre(48);
        // map [−1, 1] to [0, 1]
        let nodes: Vec<(f64, f64)> = x.iter().zip(&w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        simplex_recursive(n, b, length, &nodes)
    } else {
        f64::NAN
    };
    Ok((closed, quad))
}

/// `F_n(L) = ∫_0^L g^{−a} F_{n−1}(L − g) dg`, `F_0 = 1`, with `g = L w^{1/b}`
/// removing the endpoint singularity.
fn simplex_recursive(n: usize, b: f64, len: f64, nodes: &[(f64, f64)]) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if len <= 0.0 {
        return 0.0;
    }
    let scale = len.powf(b) / b;
    nodes
        .iter()
        .map(|&(w, wt)| wt * simplex_recursive(n - 1, b, len * (1.0 - w.powf(1.0 / b)), nodes))
        .sum::<f64>()
        * scale
}

/// `max_{lattice} U^α μ / (2^{d−α} max_{path points} U^α μ)`; at most 1 by the
/// first maximum principle. The lattice covers the path's bounding box plus
/// a 10% margin with spacing `step`, capped at `max_points` nodes.
pub fn maximum_principle_ratio(occ: &OccupationMeasure<'_>, alpha: f64, step: f64, max_points: usize) -> Result<f64> {
    let d = occ.dim();
    if !(alpha > 0.0 && alpha < d as f64) {
        return Err(param(format!("alpha = {alpha} outside (0, {d})")));
    }
    let kernel = AtomKernel::new(occ, alpha, BallModel::default());
    let atoms: Vec<(&[f64], f64)> = occ.atoms().filter(|a| a.2 > 0.0).map(|(_, p, w)| (p, w)).collect();
    let potential = |x: &[f64]| atoms.iter().map(|(p, w)| w * kernel.eval(dist2(p, x))).sum::<f64>();
    let on_path = atoms.iter().map(|(p, _)| potential(p)).fold(0.0, f64::max);
    let (lo, hi) = occ.bounding_box();
    let per_axis = (max_points as f64).powf(1.0 / d as f64).floor().max(2.0) as usize;
    let axes: Vec<(f64, f64, usize)> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| {
            let margin = 0.1 * (h - l).max(step);
            let (a, b) = (l - margin, h + margin);
            let k = (((b - a) / step).ceil() as usize + 1).min(per_axis);
            (a, b, k)
        })
        .collect();
    let total: usize = axes.iter().map(|a| a.2).product();
    let mut x = vec![0.0; d];
    let mut lattice = 0.0f64;
    for flat in 0..total {
        let mut rem = flat;
        for (l, &(a, b, k)) in axes.iter().enumerate() {
            let i = rem % k;
            rem /= k;
            x[l] = a + (b - a) * i as f64 / (k - 1) as f64;
        }
        lattice = lattice.max(potential(&x));
    }
    let factor = 2f64.powf(d as f64 - alpha);
    Ok(if on_path.is_infinite() { 0.0 } else { lattice / (factor * on_path) })
}

/// [`maximum_principle_ratio`] over `trials` independent paths of `spec`.
pub fn maximum_principle_check(spec: &ProcessSpec, alpha: f64, trials: usize, step: f64, max_points: usize) -> Result<BoundReport> {
    let sampler = Sampler::new(spec)?;
    let ratios = map_indexed(trials, |rep| -> Result<f64> {
        let path = sampler.sample(rep as u64)?;
        let occ = OccupationMeasure::new(&path, 0.0, path.horizon())?;
        maximum_principle_ratio(&occ, alpha, step, max_points)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut report = BoundReport::new("maximum_principle");
    report.n_configs = trials;
    let (arg, worst) = ratios.iter().copied().enumerate().fold((0, 0.0), |acc, (i, r)| if r > acc.1 { (i, r) } else { acc });
    report.worst_ratio = worst;
    report.violations = ratios.iter().filter(|&&r| r > 1.0).count();
    report.witness = json!({ "replication": arg, "seed": spec.seed, "ratio": worst });
    report.constants.insert("factor".into(), 2f64.powf(spec.dim as f64 - alpha));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_branches() {
        assert_eq!(psi_gamma(1.0, 0.5).unwrap(), 2.0);
        assert_eq!(psi_gamma(2.0, 1.0).unwrap(), (std::f64::consts::E + 1.0).ln());
        assert!(psi_gamma(1.0, 0.0).is_err());
        assert!(psi_gamma(0.0, 0.5).is_err());
    }

    #[test]
    fn simplex_small_cases() {
        let (c, q) = simplex_beta_integral(1, 0.0, 1.0).unwrap();
        assert!((c - 1.0).abs() < 1e-12 && (q - 1.0).abs() < 1e-12);
        let (c, q) = simplex_beta_integral(3, 0.0, 1.0).unwrap();
        assert!((c - 1.0 / 6.0).abs() < 1e-12 && (q - 1.0 / 6.0).abs() < 1e-10);
        let (c, _) = simplex_beta_integral(1, 0.25, 2.0).unwrap();
        assert!((c - 2f64.powf(0.75) / 0.75).abs() < 1e-12);
        assert!(simplex_beta_integral(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_path_satisfies_maximum_principle() {
        let spec = ProcessSpec::constant(2, 64);
        let rep = maximum_principle_check(&spec, 1.0, 1, 0.05, 400).unwrap();
        assert!(rep.passed());
    }
}
