//! Gaussian covariance models: exact characteristic functions of increment
//! vectors and the local nondeterminism ratio.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::BoundReport;
use crate::error::{param, Error, Result};
use crate::rng::aux_stream;

type Kernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Centered Gaussian process with i.i.d. coordinates sharing the covariance
/// kernel `R(s, t)`.
#[derive(Clone)]
pub struct CovarianceModel {
    label: String,
    dim: usize,
    hurst: f64,
    horizon: f64,
    kernel: Kernel,
}

impl fmt::Debug for CovarianceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovarianceModel")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("hurst", &self.hurst)
            .finish()
    }
}

impl CovarianceModel {
    /// `R(s,t) = ½(s^{2H} + t^{2H} − |t−s|^{2H})`.
    pub fn fbm(hurst: f64, dim: usize) -> Self {
        let h2 = 2.0 * hurst;
        Self::custom(format!("fbm(H={hurst})"), hurst, dim, move |s, t| {
            0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2))
        })
    }

    pub fn brownian(dim: usize) -> Self {
        Self::custom("brownian", 0.5, dim, |s, t| s.min(t))
    }

    pub fn custom(label: impl Into<String>, hurst: f64, dim: usize, kernel: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), dim, hurst, horizon: 1.0, kernel: Arc::new(kernel) }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn cov(&self, s: f64, t: f64) -> f64 {
        (self.kernel)(s, t)
    }

    pub fn gram(&self, times: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(times.len(), times.len(), |i, j| self.cov(times[i], times[j]))
    }

    /// Covariance of the increments `X_{t_j} − X_{t_{j−1}}` of one coordinate
    /// over `partition = [t_0, t_1, …, t_n]`.
    pub fn increment_gram(&self, partition: &[f64]) -> DMatrix<f64> {
        let n = partition.len() - 1;
        let r = |a: usize, b: usize| self.cov(partition[a], partition[b]);
        DMatrix::from_fn(n, n, |j, k| r(j + 1, k + 1) - r(j + 1, k) - r(j, k + 1) + r(j, k))
    }

    /// Smallest eigenvalue of the Gram matrix over `times`; errors below `−1e−10`.
    pub fn check_psd(&self, times: &[f64]) -> Result<f64> {
        min_eigen(&self.gram(times))
    }

    /// Lower constant `C_−` of `E(X_t − X_s)² ≥ C_−|t−s|^{2H}` sampled on a grid.
    pub fn variance_bounds(&self, grid: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let step = self.horizon / grid as f64;
        for i in 0..=grid {
            for j in i + 1..=grid {
                let (s, t) = (i as f64 * step, j as f64 * step);
                let v = self.cov(t, t) - 2.0 * self.cov(s, t) + self.cov(s, s);
                let ratio = v / (t - s).powf(2.0 * self.hurst);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        (lo, hi)
    }
}

fn min_eigen(m: &DMatrix<f64>) -> Result<f64> {
    let ev = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if ev < -1e-10 {
        return Err(Error::Model(format!("Gram matrix not positive semidefinite (eigenvalue {ev:e})")));
    }
    Ok(ev)
}

fn check_partition(partition: &[f64], horizon: f64) -> Result<()> {
    if partition.len() < 2 || partition[0] != 0.0 {
        return Err(param("partition must start at 0 and have at least one increment"));
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) || partition[partition.len() - 1] > horizon {
        return Err(param("partition must be strictly increasing within [0, T]"));
    }
    Ok(())
}

/// `|E exp(i Σ_j ⟨ξ_j, X_{t_j} − X_{t_{j−1}}⟩)| = exp(−½ Σ_ℓ ξ^ℓᵀ G ξ^ℓ)`
/// with `G` the increment Gram matrix; `xi[j]` is the `d`-vector `ξ_{j+1}`.
pub fn gaussian_charfun_exact(model: &CovarianceModel, partition: &[f64], xi: &[Vec<f64>]) -> Result<f64> {
    check_partition(partition, model.horizon)?;
    let n = partition.len() - 1;
    if xi.len() != n || xi.iter().any(|v| v.len() != model.dim) {
        return Err(param(format!("need {n} frequency vectors of dimension {}", model.dim)));
    }
    if xi.iter().flatten().any(|&v| v == 0.0 || !v.is_finite()) {
        return Err(param("frequency coordinates must be finite and nonzero"));
    }
    let g = model.increment_gram(partition);
    min_eigen(&g)?;
    Ok((-0.5 * quadratic_form(&g, xi, model.dim)).exp())
}

/// `Σ_ℓ ξ^ℓᵀ G ξ^ℓ`, the variance of `Σ_j ⟨ξ_j, ΔX_j⟩`.
fn quadratic_form(g: &DMatrix<f64>, xi: &[Vec<f64>], dim: usize) -> f64 {
    let n = xi.len();
    (0..dim)
        .map(|l| {
            let mut q = 0.0;
            for j in 0..n {
                for k in 0..n {
                    q += xi[j][l] * g[(j, k)] * xi[k][l];
                }
            }
            q
        })
        .sum()
}

/// Random configuration: a partition of uniform order statistics in `(0, T)`
/// and frequencies with log-uniform magnitudes in `[10^{-2}, 10^2]` and random
/// signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub partition: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
}

impl SweepConfig {
    pub fn random<R: Rng>(rng: &mut R, n: usize, dim: usize, horizon: f64) -> Self {
        let mut ts: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * horizon).collect();
        ts.sort_by(f64::total_cmp);
        let mut partition = vec![0.0];
        partition.extend(ts);
        let xi = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let mag = 10f64.powf(rng.random_range(-2.0..2.0));
                        if rng.random::<bool>() { mag } else { -mag }
                    })
                    .collect()
            })
            .collect();
        Self { partition, xi }
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    fn is_valid(&self) -> bool {
        self.partition.windows(2).all(|w| w[1] > w[0])
    }
}

/// `c_0` implied by local nondeterminism: with `Var(Σ⟨ξ_j, ΔX_j⟩) ≥ a Σ y²`,
/// `y = |ξ_j^ℓ| τ_j^H` and `a = C·C_−`, each factor obeys
/// `exp(−a y²/2) ≤ max(1, 16e^{−2}/a²) y^{−k}` for `k ∈ {0, 4}`.
pub fn a_priori_c0(lnd: f64, c_minus: f64, dim: usize) -> f64 {
    let a = lnd * c_minus;
    (16.0 * (-2.0f64).exp() / (a * a)).max(1.0).powi(dim as i32)
}

/// Sweep the decay bound `|cf| ≤ c_0^n Π_{j,ℓ} (|ξ_j^ℓ| τ_j^H)^{−k_{j,ℓ}}` over
/// random configurations with `n ≤ n_max` and every `k ∈ {0,4}^{n×d}`.
///
/// Violations are counted against `c0` (the a-priori constant when given);
/// the smallest workable `c_0` over the sweep is always reported.
pub fn assumption_i_sweep(model: &CovarianceModel, n_max: usize, trials: usize, seed: u64, c0: Option<f64>) -> Result<BoundReport> {
    if n_max == 0 || model.dim * n_max > 16 {
        return Err(param("assumption sweep needs 1 ≤ n·d ≤ 16"));
    }
    let mut rng = aux_stream(seed, 0xA551);
    let mut report = BoundReport::new("assumption_i");
    let mut needed = 0.0f64;
    let mut witness = None;
    let h = model.hurst;
    for _ in 0..trials {
        let n = rng.random_range(1..=n_max);
        let cfg = SweepConfig::random(&mut rng, n, model.dim, model.horizon);
        if !cfg.is_valid() {
            continue;
        }
        let lhs = gaussian_charfun_exact(model, &cfg.partition, &cfg.xi)?;
        let y: Vec<f64> = (0..n)
            .flat_map(|j| {
                let tau = (cfg.partition[j + 1] - cfg.partition[j]).powf(h);
                cfg.xi[j].iter().map(move |x| x.abs() * tau)
            })
            .collect();
        let mut worst_here = 0.0f64;
        let mut worst_k = 0u32;
        for mask in 0u32..(1 << y.len()) {
            let log_rhs: f64 = y
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, yi)| -4.0 * yi.ln())
                .sum();
            // c_0 needed for this k: (lhs / Π y^{−k})^{1/n}
            let c = ((lhs.ln() - log_rhs) / n as f64).exp();
            if c > worst_here {
                worst_here = c;
                worst_k = mask;
            }
            if let Some(c0) = c0 {
                if lhs > c0.powi(n as i32) * log_rhs.exp() * (1.0 + 1e-12) {
                    report.violations += 1;
                }
            }
        }
        report.n_configs += 1;
        if worst_here > needed {
            needed = worst_here;
            witness = Some((cfg, worst_k, lhs));
        }
    }
    report.constants.insert("c0_needed".into(), needed);
    if let Some(c0) = c0 {
        report.constants.insert("c0".into(), c0);
        report.worst_ratio = needed / c0;
    } else {
        report.worst_ratio = if needed.is_finite() { 0.0 } else { f64::INFINITY };
    }
    if let Some((cfg, k, lhs)) = witness {
        let ks: Vec<u32> = (0..cfg.n() * model.dim).map(|b| 4 * (k >> b & 1)).collect();
        report.witness = json!({ "partition": cfg.partition, "xi": cfg.xi, "k": ks, "charfun": lhs });
    }
    report.notes.push(format!("model {}; theta = 0; n ≤ {n_max} only", model.label));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LndEstimate {
    /// Smallest observed lhs/rhs.
    pub c_hat: f64,
    pub trials: usize,
    pub skipped: usize,
    pub witness: Option<SweepConfig>,
}

/// `Var(Σ_k ⟨ξ_k, X_{t_k} − X_{t_{k−1}}⟩) / Σ_ℓ Σ_k ξ_{k,ℓ}² E(ΔX_k^ℓ)²`
/// minimized over random configurations with `m` increments.
pub fn lnd_constant_estimate(model: &CovarianceModel, m: usize, trials: usize, seed: u64) -> Result<LndEstimate> {
    if m == 0 || m > 6 {
        return Err(param("lnd sweep supports 1 ≤ m ≤ 6"));
    }
    let mut rng = aux_stream(seed, 0x14D0 + m as u64);
    let mut out = LndEstimate { c_hat: f64::INFINITY, trials: 0, skipped: 0, witness: None };
    for _ in 0..trials {
        let cfg = SweepConfig::random(&mut rng, m, model.dim, model.horizon);
        let g = model.increment_gram(&cfg.partition);
        if !cfg.is_valid() || (0..m).any(|k| !(g[(k, k)] > 1e-300)) || min_eigen(&g).is_err() {
            out.skipped += 1;
            continue;
        }
        let lhs = quadratic_form(&g, &cfg.xi, model.dim);
        let rhs: f64 = (0..m).map(|k| g[(k, k)] * cfg.xi[k].iter().map(|x| x * x).sum::<f64>()).sum();
        let ratio = lhs / rhs;
        out.trials += 1;
        if ratio < out.c_hat {
            out.c_hat = ratio;
            out.witness = Some(cfg);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::fbm::FbmGenerator;
    use crate::rng::stream;

    #[test]
    fn single_increment_is_univariate_gaussian() {
        let m = CovarianceModel::fbm(0.3, 1);
        let v = gaussian_charfun_exact(&m, &[0.0, 0.4], &[vec![2.5]]).unwrap();
        assert!((v - (-0.5 * 6.25 * 0.4f64.powf(0.6)).exp()).abs() < 1e-15);
    }

    #[test]
    fn y4_bound_constant() {
        // max_y y^4 exp(−y²/2) is attained at y = 2
        let c = (0..20000).map(|i| i as f64 * 1e-3).map(|y| y.powi(4) * (-0.5 * y * y).exp()).fold(0.0, f64::max);
        assert!((c - 16.0 * (-2.0f64).exp()).abs() < 1e-6);
        assert_eq!(a_priori_c0(1.0, 1.0, 1), 16.0 * (-2.0f64).exp());
    }

    #[test]
    fn brownian_lnd_ratio_is_one() {
        let est = lnd_constant_estimate(&CovarianceModel::brownian(2), 4, 500, 3).unwrap();
        assert!((est.c_hat - 1.0).abs() < 1e-9, "{}", est.c_hat);
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let m = CovarianceModel::brownian(1);
        assert!(gaussian_charfun_exact(&m, &[0.0, 0.5], &[vec![0.0]]).is_err());
        assert!(gaussian_charfun_exact(&m, &[0.1, 0.5], &[vec![1.0]]).is_err());
    }

    #[test]
    fn non_psd_kernel_is_a_model_error() {
        let bad = CovarianceModel::custom("bad", 0.5, 1, |s, t| if s == t { 1.0 } else { -1.0 });
        let err = bad.check_psd(&[0.1, 0.2, 0.3]).unwrap_err();
        assert!(matches!(err, Error::Model(_)));
    }

    #[test]
    fn exact_charfun_matches_monte_carlo() {
        let h = 0.7;
        let n = 64;
        let gen = FbmGenerator::new(h, n).unwrap();
        let model = CovarianceModel::fbm(h, 1);
        let partition = [0.0, 0.25, 0.5, 1.0];
        let xi = [vec![1.3], vec![-0.7], vec![2.0]];
        let exact = gaussian_charfun_exact(&model, &partition, &xi).unwrap();
        let reps = 20000;
        let mut buf = vec![0.0; n + 1];
        let (mut re, mut im) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
        for rep in 0..reps {
            gen.sample_path(&mut stream(99, rep as u64, 0), 1.0, &mut buf);
            let at = |t: f64| buf[(t * n as f64) as usize];
            let phase: f64 = (0..3).map(|j| xi[j][0] * (at(partition[j + 1]) - at(partition[j]))).sum();
            re.push(phase.cos());
            im.push(phase.sin());
        }
        let (mr, mi) = (crate::stats::mean(&re), crate::stats::mean(&im));
        let se = (crate::stats::variance(&re) / reps as f64).sqrt();
        assert!((mr - exact).abs() < 3.0 * se + 1e-3, "{mr} vs {exact}");
        assert!(mi.abs() < 3.0 * (crate::stats::variance(&im) / reps as f64).sqrt() + 1e-3);
    }
}
