//! Experiment orchestration: run a config across replications, write
//! results with a checksummed manifest, and replay manifests.

pub mod config;
pub mod plotdata;

pub use config::{radii_of, ExperimentConfig, Family, OracleCheck, Operation, PathFormat};
pub use plotdata::{emit_plotdata, PlotOptions};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::limits::{
    average_density, default_small_grid, default_u_grid, kernel_identities, potential_limit_alpha_to_zero,
    potential_limit_varying_order, DensityLimitReport, LimitKind,
};
use crate::occupation::{rescaled_potential, OccupationMeasure};
use crate::oracles::{self, BoundReport, CovarianceModel};
use crate::par::{map_indexed, with_workers};
use crate::process_sim::io::{self, PathHeader};
use crate::process_sim::{ProcessKind, ProcessSpec, Sampler};
use crate::regularity::{self, OscillationOptions, SupScalingOptions};
use crate::rng::replication_seed;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub total_secs: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub master_seed: u64,
    /// Seed of each replication's random streams.
    pub replication_seeds: Vec<u64>,
    pub failed_replications: Vec<usize>,
    pub files: Vec<FileRecord>,
    pub wall_clock: WallClock,
    pub config: ExperimentConfig,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), msg: e.to_string() })
    }
}

/// Pass/fail outcome of a check evaluated by the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub operation: String,
    pub replications: usize,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Hash of everything that determines the outputs (worker count and output
/// directory excluded).
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut canonical = cfg.clone();
    canonical.workers = None;
    canonical.out = PathBuf::new();
    let bytes = serde_json::to_vec(&canonical).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Validate, execute and persist one experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentManifest> {
    cfg.validate()?;
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let out = cfg.out.clone();
    fs::create_dir_all(&out)?;
    let start = Instant::now();
    let (mut written, failed, summary) = with_workers(workers, || execute(cfg, &out))??;
    write_json(&out, SUMMARY_FILE, &summary, &mut written)?;
    let mut files = written
        .iter()
        .map(|name| file_record(&out, name))
        .collect::<Result<Vec<_>>>()?;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = ExperimentManifest {
        config_hash: config_hash(cfg),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.seed,
        replication_seeds: (0..cfg.replications as u64).map(|r| replication_seed(cfg.seed, r)).collect(),
        failed_replications: failed,
        files,
        wall_clock: WallClock { total_secs: start.elapsed().as_secs_f64(), workers },
        config: cfg.clone(),
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Load the summary written next to a manifest.
pub fn load_summary(out: &Path) -> Result<RunSummary> {
    let path = out.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path, line: e.line(), msg: e.to_string() })
}

/// Re-run a manifest's config into `out` (default `<original out>/replay`)
/// and require every recorded checksum to match.
pub fn replay(manifest: &ExperimentManifest, out: Option<&Path>, workers: Option<usize>) -> Result<ExperimentManifest> {
    let mut cfg = manifest.config.clone();
    cfg.out = out.map_or_else(|| cfg.out.join("replay"), Path::to_path_buf);
    if workers.is_some() {
        cfg.workers = workers;
    }
    let mut diffs = Vec::new();
    if config_hash(&cfg) != manifest.config_hash {
        diffs.push("config hash differs from the recorded one".to_string());
    }
    let seeds: Vec<u64> = (0..cfg.replications as u64).map(|r| replication_seed(cfg.seed, r)).collect();
    if seeds != manifest.replication_seeds {
        diffs.push("replication seeds differ from the recorded ones".to_string());
    }
    let fresh = run(&cfg)?;
    for rec in &manifest.files {
        match fresh.files.iter().find(|f| f.path == rec.path) {
            None => diffs.push(format!("{}: missing in replay", rec.path)),
            Some(f) if f.sha256 != rec.sha256 => {
                diffs.push(format!("{}: sha256 {} != recorded {}", rec.path, &f.sha256[..12], &rec.sha256[..12]))
            }
            Some(_) => {}
        }
    }
    for f in &fresh.files {
        if !manifest.files.iter().any(|r| r.path == f.path) {
            diffs.push(format!("{}: not in the recorded manifest", f.path));
        }
    }
    if diffs.is_empty() {
        Ok(fresh)
    } else {
        Err(Error::Reproducibility(format!("{} difference(s):\n  {}", diffs.len(), diffs.join("\n  "))))
    }
}

fn file_record(out: &Path, name: &str) -> Result<FileRecord> {
    let bytes = fs::read(out.join(name))?;
    Ok(FileRecord { path: name.to_string(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T, written: &mut Vec<String>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(out.join(name), text)?;
    written.push(name.to_string());
    Ok(())
}

fn write_text(out: &Path, name: &str, text: &str, written: &mut Vec<String>) -> Result<()> {
    fs::write(out.join(name), text)?;
    written.push(name.to_string());
    Ok(())
}

type Execution = (Vec<String>, Vec<usize>, RunSummary);

fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<Execution> {
    let spec = cfg.seeded_process();
    let reps = cfg.replications;
    let mut written = Vec::new();
    let mut failed = Vec::new();
    let mut checks = Vec::new();
    let sampler = Sampler::new(&spec)?;
    match &cfg.operation {
        Operation::Simulate { format } => {
            let header = PathHeader::for_spec(&spec);
            let ext = match format {
                PathFormat::Csv => "csv",
                PathFormat::Binary => "bin",
            };
            let results = map_indexed(reps, |rep| -> Result<String> {
                let path = sampler.sample(rep as u64)?;
                let name = format!("path_{rep:04}.{ext}");
                io::save(&out.join(&name), &header, &path)?;
                Ok(name)
            });
            for (rep, r) in results.into_iter().enumerate() {
                match r {
                    Ok(name) => written.push(name),
                    Err(_) => failed.push(rep),
                }
            }
        }
        Operation::Potential { alpha, points, interval } => {
            let rows = map_indexed(reps, |rep| -> Result<String> {
                let path = sampler.sample(rep as u64)?;
                let [s, t] = interval.unwrap_or([0.0, path.horizon()]);
                let occ = OccupationMeasure::new(&path, s, t)?;
                let mut text = String::new();
                for (i, x) in points.iter().enumerate() {
                    let est = rescaled_potential(&occ, *alpha, x)?;
                    text.push_str(&format!(
                        "{rep},{i},{:?},{:?},{},{}\n",
                        est.value, est.err_bound, est.singular_corrected, est.divergent
                    ));
                }
                Ok(text)
            });
            let mut csv = String::from("replication,point,value,err_bound,singular_corrected,divergent\n");
            for (rep, r) in rows.into_iter().enumerate() {
                match r {
                    Ok(t) => csv.push_str(&t),
                    Err(_) => failed.push(rep),
                }
            }
            write_text(out, "potential.csv", &csv, &mut written)?;
            write_json(out, "points.json", points, &mut written)?;
        }
        Operation::Limits { limit, points, s_order, grid } => {
            let reports = map_indexed(reps, |rep| -> Result<Vec<DensityLimitReport>> {
                let path = sampler.sample(rep as u64)?;
                let occ = OccupationMeasure::new(&path, 0.0, path.horizon())?;
                points
                    .iter()
                    .map(|x| match limit {
                        LimitKind::AlphaToZero => {
                            potential_limit_alpha_to_zero(&occ, x, grid.as_deref().unwrap_or(&default_small_grid()))
                        }
                        LimitKind::AverageDensity => {
                            average_density(&occ, s_order.unwrap_or(1.0), x, grid.as_deref().unwrap_or(&default_u_grid()))
                        }
                        LimitKind::VaryingOrder => potential_limit_varying_order(
                            &occ,
                            s_order.unwrap_or(1.0),
                            x,
                            grid.as_deref().unwrap_or(&default_small_grid()),
                        ),
                    })
                    .collect()
            });
            let mut all = Vec::new();
            for (rep, r) in reports.into_iter().enumerate() {
                match r {
                    Ok(v) => all.push(v),
                    Err(_) => {
                        failed.push(rep);
                        all.push(vec![]);
                    }
                }
            }
            let n_failed_limits = all.iter().flatten().filter(|r| r.failed).count();
            checks.push(Check {
                name: "limits_stable".into(),
                passed: n_failed_limits == 0,
                detail: format!("{n_failed_limits} unstable sequences"),
            });
            write_json(out, "limits.json", &all, &mut written)?;
        }
        Operation::SupLScaling { alpha, t_center, radii, aggregate, max_sites, min_window_samples, tolerance } => {
            let defaults = SupScalingOptions::default();
            let opts = SupScalingOptions {
                aggregate: aggregate.unwrap_or(defaults.aggregate),
                max_sites_per_radius: max_sites.unwrap_or(defaults.max_sites_per_radius),
                min_window_samples: min_window_samples.unwrap_or(defaults.min_window_samples),
                ..defaults
            };
            let fit = regularity::sup_l_scaling(&spec, *alpha, *t_center, &radii_of(*radii), reps, &opts)?;
            // At a fixed radius the max over replications is self-similar in
            // law, so the exponent is read off the raw statistic.
            if let Some(tol) = tolerance {
                let mut c = slope_check("sup_l_slope", fit.slope_uncorrected, fit.expected, *tol);
                c.detail.push_str(&format!(" (log-corrected slope {:.4})", fit.slope));
                checks.push(c);
            }
            write_fit(out, &fit, &mut written)?;
        }
        Operation::LowerOscillation { t_center, alpha_for_correction, radii, min_window_samples, tolerance } => {
            let defaults = OscillationOptions::default();
            let opts = OscillationOptions { min_window_samples: min_window_samples.unwrap_or(defaults.min_window_samples), ..defaults };
            let fit = regularity::lower_oscillation(&spec, *t_center, &radii_of(*radii), reps, *alpha_for_correction, &opts)?;
            // Same reasoning as for the sup: the min over replications scales exactly.
            if let Some(tol) = tolerance {
                let mut c = slope_check("oscillation_slope", fit.fit.slope_uncorrected, fit.fit.expected, *tol);
                c.detail.push_str(&format!(" (log-corrected slope {:.4})", fit.fit.slope));
                checks.push(c);
            }
            checks.push(Check {
                name: "oscillation_ratio_positive".into(),
                passed: !fit.vanishes,
                detail: format!("min normalized ratio {:e}", fit.min_normalized),
            });
            write_fit(out, &fit.fit, &mut written)?;
            write_json(out, "oscillation.json", &fit, &mut written)?;
        }
        Operation::Modulus { radii, max_spread } => {
            let fit = regularity::modulus_of_continuity(&spec, &radii_of(*radii), reps, *max_spread)?;
            checks.push(Check {
                name: "modulus_bounded".into(),
                passed: fit.bounded,
                detail: format!("upper decile / median = {:.3}", fit.spread),
            });
            write_fit(out, &fit.fit, &mut written)?;
            write_json(out, "modulus.json", &fit, &mut written)?;
        }
        Operation::PotentialFieldHolder { alpha, beta_incr, x_grid, t_grid } => {
            let est = regularity::potential_field_holder(&spec, *alpha, *beta_incr, x_grid, t_grid, reps)?;
            checks.push(Check {
                name: "spatial_exponent".into(),
                passed: est.spatial_ok(),
                detail: format!("gamma1 = {:.3}, target {:.3}", est.gamma1, est.target1),
            });
            checks.push(Check {
                name: "temporal_exponent".into(),
                passed: est.temporal_ok(),
                detail: format!("gamma2 = {:.3}, target {:.3}", est.gamma2, est.target2),
            });
            write_json(out, "holder.json", &est, &mut written)?;
        }
        Operation::Oracle { check } => {
            let report = run_oracle(check, &spec, reps)?;
            checks.push(Check {
                name: report.check.clone(),
                passed: report.passed(),
                detail: format!("worst ratio {:.4}, {} violations", report.worst_ratio, report.violations),
            });
            write_json(out, "report.json", &report, &mut written)?;
        }
    }
    let summary = RunSummary { id: cfg.id.clone(), operation: cfg.operation.label().into(), replications: reps, checks };
    Ok((written, failed, summary))
}

fn slope_check(name: &str, slope: f64, expected: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        passed: (slope - expected).abs() <= tol,
        detail: format!("slope {slope:.4}, expected {expected:.4} ± {tol}"),
    }
}

fn write_fit(out: &Path, fit: &regularity::ScalingFit, written: &mut Vec<String>) -> Result<()> {
    write_json(out, "fit.json", fit, written)?;
    let mut buf = Vec::new();
    regularity::write_fit_csv(&mut buf, fit)?;
    fs::File::create(out.join("per_replication.csv"))?.write_all(&buf)?;
    written.push("per_replication.csv".into());
    Ok(())
}

fn gaussian_model(spec: &ProcessSpec) -> Result<CovarianceModel> {
    let model = match spec.kind {
        ProcessKind::Brownian => CovarianceModel::brownian(spec.dim),
        ProcessKind::Fbm => CovarianceModel::fbm(spec.effective_hurst(), spec.dim),
        other => return Err(Error::Validation(vec![format!("{} has no exact Gaussian model", other.label())])),
    };
    Ok(model.with_horizon(spec.horizon))
}

fn run_oracle(check: &OracleCheck, spec: &ProcessSpec, reps: usize) -> Result<BoundReport> {
    match check {
        OracleCheck::AssumptionI { n_max, trials } => {
            let model = gaussian_model(spec)?;
            let lnd = oracles::lnd_constant_estimate(&model, (*n_max).max(2), 10_000, spec.seed ^ 0x1)?;
            let (c_minus, _) = model.variance_bounds(64);
            let c0 = oracles::a_priori_c0(0.5 * lnd.c_hat, c_minus, spec.dim);
            let mut rep = oracles::assumption_i_sweep(&model, *n_max, *trials, spec.seed, Some(c0))?;
            rep.constants.insert("lnd_c_hat".into(), lnd.c_hat);
            rep.constants.insert("c_minus".into(), c_minus);
            Ok(rep)
        }
        OracleCheck::Lnd { m, trials } => {
            let model = gaussian_model(spec)?;
            let est = oracles::lnd_constant_estimate(&model, *m, *trials, spec.seed)?;
            let mut rep = BoundReport::new("lnd");
            rep.n_configs = est.trials;
            rep.violations = usize::from(!(est.c_hat > 0.0));
            rep.constants.insert("c_hat".into(), est.c_hat);
            rep.constants.insert("skipped".into(), est.skipped as f64);
            rep.witness = serde_json::to_value(&est.witness)?;
            Ok(rep)
        }
        OracleCheck::Moment { p_grid, iota } => oracles::moment_bound_check(spec, p_grid, reps, *iota),
        OracleCheck::Tail { alpha, interval, u_grid, shifted } => oracles::tail_bound_check(
            spec,
            *alpha,
            (interval[0], interval[1]),
            u_grid,
            reps,
            &oracles::TailOptions { x: None, shifted: *shifted },
        ),
        OracleCheck::MaximumPrinciple { alpha, step, max_points } => {
            oracles::maximum_principle_check(spec, *alpha, reps, *step, *max_points)
        }
        OracleCheck::SimplexBeta { n, a, length } => {
            let (closed, quad) = oracles::simplex_beta_integral(*n, *a, *length)?;
            let mut rep = BoundReport::new("simplex_beta");
            rep.n_configs = 1;
            let rel = (closed - quad).abs() / closed;
            rep.worst_ratio = rel / 1e-3;
            rep.constants.insert("closed_form".into(), closed);
            rep.constants.insert("quadrature".into(), quad);
            rep.constants.insert("relative_error".into(), rel);
            Ok(rep)
        }
        OracleCheck::KernelIdentities { eps, r } => {
            let k = kernel_identities(*eps, *r)?;
            let mut rep = BoundReport::new("kernel_identities");
            rep.n_configs = 2;
            rep.worst_ratio = k.max_abs_error() / 1e-8;
            rep.witness = serde_json::to_value(k)?;
            Ok(rep)
        }
    }
}
