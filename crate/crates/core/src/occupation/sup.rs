use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::occupation::measure::OccupationMeasure;
use crate::occupation::potential::{rescaled_potential, AtomKernel, BallModel};
use crate::process_sim::path::dist2;

pub const DEFAULT_MAX_SITES: usize = 4096;

/// Largest value of `L^{α,X}` found over sampled path points.
///
/// By the maximum principle for Riesz potentials the supremum over all of
/// `R^d` is at most `max_principle_factor · value · (1 + relative error)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupPotential {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub argmax_index: usize,
    pub err_bound: f64,
    pub max_principle_factor: f64,
    pub sites: usize,
}

/// Evaluate `L^{α,X}` at every `K`-th atom, with `K` chosen so that at most
/// `max_sites` points are visited.
pub fn sup_potential_over_space(occ: &OccupationMeasure<'_>, alpha: f64, max_sites: usize) -> Result<SupPotential> {
    if max_sites == 0 {
        return Err(param("max_sites must be positive"));
    }
    let atoms: Vec<usize> = occ.atoms().map(|(i, _, _)| i).collect();
    let stride = atoms.len().div_ceil(max_sites).max(1);
    let sites: Vec<usize> = atoms.iter().step_by(stride).copied().collect();
    sup_potential_at_sites(occ, alpha, &sites)
}

/// Largest `L^{α,X}` over the path points with the given grid indices.
pub fn sup_potential_at_sites(occ: &OccupationMeasure<'_>, alpha: f64, site_indices: &[usize]) -> Result<SupPotential> {
    let d = occ.dim();
    if !(alpha > 0.0 && alpha < d as f64) {
        return Err(param(format!("alpha = {alpha} outside (0, {d})")));
    }
    let kernel = AtomKernel::new(occ, alpha, BallModel::default());
    let path = occ.path();
    let atoms: Vec<(&[f64], f64)> = occ.atoms().map(|(_, x, w)| (x, w)).collect();
    let mut best: Option<(usize, f64)> = None;
    for &i in site_indices {
        let x = path.point(i);
        let v: f64 = atoms.iter().map(|(p, w)| w * kernel.eval(dist2(p, x))).sum();
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    let (argmax_index, _) = best.ok_or_else(|| param("no evaluation sites"))?;
    let est = rescaled_potential(occ, alpha, path.point(argmax_index))?;
    Ok(SupPotential {
        value: est.value,
        argmax: est.x,
        argmax_index,
        err_bound: est.err_bound,
        max_principle_factor: 2f64.powf(d as f64 - alpha),
        sites: site_indices.len(),
    })
}
