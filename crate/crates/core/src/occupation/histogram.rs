use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::occupation::measure::OccupationMeasure;

/// Occupation density on the cubic lattice of side `bin_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeHistogram {
    pub bin_width: f64,
    pub dim: usize,
    pub interval: (f64, f64),
    /// Box index `floor(x / bin_width)` ↦ mass / volume.
    pub bins: BTreeMap<Vec<i64>, f64>,
    /// Set when `H d ≥ 1`, where no local time exists.
    pub warning: Option<String>,
}

impl LocalTimeHistogram {
    pub fn box_of(&self, x: &[f64]) -> Vec<i64> {
        box_index(x, self.bin_width)
    }

    pub fn density_at(&self, x: &[f64]) -> f64 {
        self.bins.get(&self.box_of(x)).copied().unwrap_or(0.0)
    }

    pub fn cell_volume(&self) -> f64 {
        self.bin_width.powi(self.dim as i32)
    }

    /// `Σ density · volume`, equal to `t − s`.
    pub fn integral(&self) -> f64 {
        self.bins.values().sum::<f64>() * self.cell_volume()
    }

    /// Largest density and the center of its box.
    pub fn max_density(&self) -> (f64, Vec<f64>) {
        self.bins
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, &v)| (v, k.iter().map(|&i| (i as f64 + 0.5) * self.bin_width).collect()))
            .unwrap_or((0.0, vec![0.0; self.dim]))
    }
}

fn box_index(x: &[f64], h: f64) -> Vec<i64> {
    x.iter().map(|v| (v / h).floor() as i64).collect()
}

/// Default bin width `(T / n_steps)^H`.
pub fn default_bin_width(occ: &OccupationMeasure<'_>) -> f64 {
    let p = occ.path();
    (p.horizon() / p.n_steps() as f64).powf(p.hurst_hint().unwrap_or(0.5))
}

pub fn local_time_histogram(occ: &OccupationMeasure<'_>, bin_width: f64) -> Result<LocalTimeHistogram> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(param(format!("bin width must be positive, got {bin_width}")));
    }
    let mut mass: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (_, x, w) in occ.atoms() {
        *mass.entry(box_index(x, bin_width)).or_insert(0.0) += w;
    }
    let vol = bin_width.powi(occ.dim() as i32);
    let bins = mass.into_iter().map(|(k, m)| (k, m / vol)).collect();
    let hd = occ.hurst_hint().unwrap_or(0.5) * occ.dim() as f64;
    let warning = (hd >= 1.0).then(|| format!("H d = {hd} >= 1: the path has no local time"));
    Ok(LocalTimeHistogram { bin_width, dim: occ.dim(), interval: occ.interval(), bins, warning })
}

/// Histogram density of the box of side `bin_width` centred on `x`.
pub fn local_time_at(occ: &OccupationMeasure<'_>, x: &[f64], bin_width: f64) -> Result<f64> {
    if !(bin_width > 0.0) {
        return Err(param(format!("bin width must be positive, got {bin_width}")));
    }
    // Box centred on x, so the estimate does not lean towards a grid cell centre.
    let half = 0.5 * bin_width;
    let m: f64 = occ
        .atoms()
        .filter(|(_, p, _)| p.iter().zip(x).all(|(v, c)| (v - c).abs() < half))
        .map(|(_, _, w)| w)
        .sum();
    Ok(m / bin_width.powi(occ.dim() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupation::measure::occupation_measure;
    use crate::process_sim::SamplePath;

    #[test]
    fn normalization_and_speed() {
        let p = SamplePath::from_fn(10_000, 1.0, 1, Some(1.0), |_, t, x| x[0] = 2.0 * t).unwrap();
        let m = occupation_measure(&p, 0.0, 1.0).unwrap();
        let h = local_time_histogram(&m, 0.05).unwrap();
        assert!((h.integral() - 1.0).abs() < 1e-12);
        for x in [0.1, 0.77, 1.5, 1.93] {
            assert!((h.density_at(&[x]) - 0.5).abs() < 5e-3);
            assert!((local_time_at(&m, &[x], 0.05).unwrap() - 0.5).abs() < 5e-3);
        }
        assert!(local_time_histogram(&m, 0.0).is_err());
    }
}
