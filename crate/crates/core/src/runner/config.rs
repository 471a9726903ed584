//! Experiment configuration files (TOML, or JSON by extension).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::LimitKind;
use crate::occupation::check_admissible;
use crate::process_sim::{ProcessKind, ProcessSpec};
use crate::regularity::{dyadic_radii, Aggregate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    /// Worker threads; defaults to the machine's parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub process: ProcessSpec,
    pub operation: Operation,
}

fn one() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn half() -> f64 {
    0.5
}

fn three() -> f64 {
    3.0
}

fn default_radii() -> [i32; 2] {
    [6, 16]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    Simulate {
        #[serde(default)]
        format: PathFormat,
    },
    Potential {
        alpha: f64,
        points: Vec<Vec<f64>>,
        /// Time window; the whole horizon when absent.
        #[serde(default)]
        interval: Option<[f64; 2]>,
    },
    Limits {
        limit: LimitKind,
        points: Vec<Vec<f64>>,
        #[serde(default)]
        s_order: Option<f64>,
        /// Decreasing parameter grid; the default grid of the limit otherwise.
        #[serde(default)]
        grid: Option<Vec<f64>>,
    },
    SupLScaling {
        alpha: f64,
        #[serde(default = "half")]
        t_center: f64,
        /// Radii `2^{-a} … 2^{-b}`.
        #[serde(default = "default_radii")]
        radii: [i32; 2],
        #[serde(default)]
        aggregate: Option<Aggregate>,
        #[serde(default)]
        max_sites: Option<usize>,
        #[serde(default)]
        min_window_samples: Option<usize>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    LowerOscillation {
        #[serde(default = "half")]
        t_center: f64,
        alpha_for_correction: f64,
        #[serde(default = "default_radii")]
        radii: [i32; 2],
        #[serde(default)]
        min_window_samples: Option<usize>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    Modulus {
        #[serde(default = "default_radii")]
        radii: [i32; 2],
        #[serde(default = "three")]
        max_spread: f64,
    },
    PotentialFieldHolder {
        alpha: f64,
        beta_incr: f64,
        x_grid: Vec<Vec<f64>>,
        t_grid: Vec<f64>,
    },
    Oracle {
        #[serde(flatten)]
        check: OracleCheck,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum OracleCheck {
    AssumptionI { n_max: usize, trials: usize },
    Lnd { m: usize, trials: usize },
    Moment {
        p_grid: Vec<f64>,
        #[serde(default)]
        iota: Option<f64>,
    },
    Tail {
        alpha: f64,
        interval: [f64; 2],
        u_grid: Vec<f64>,
        #[serde(default)]
        shifted: bool,
    },
    MaximumPrinciple { alpha: f64, step: f64, max_points: usize },
    SimplexBeta { n: usize, a: f64, length: f64 },
    KernelIdentities { eps: f64, r: f64 },
}

/// Subcommand family an operation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Simulate,
    Potential,
    Limits,
    Regularity,
    Oracle,
}

impl Operation {
    pub fn family(&self) -> Family {
        match self {
            Self::Simulate { .. } => Family::Simulate,
            Self::Potential { .. } => Family::Potential,
            Self::Limits { .. } => Family::Limits,
            Self::SupLScaling { .. } | Self::LowerOscillation { .. } | Self::Modulus { .. } | Self::PotentialFieldHolder { .. } => {
                Family::Regularity
            }
            Self::Oracle { .. } => Family::Oracle,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Simulate { .. } => "simulate",
            Self::Potential { .. } => "potential",
            Self::Limits { .. } => "limits",
            Self::SupLScaling { .. } => "sup_l_scaling",
            Self::LowerOscillation { .. } => "lower_oscillation",
            Self::Modulus { .. } => "modulus",
            Self::PotentialFieldHolder { .. } => "potential_field_holder",
            Self::Oracle { .. } => "oracle",
        }
    }
}

pub fn radii_of(range: [i32; 2]) -> Vec<f64> {
    dyadic_radii(range[0], range[1])
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, source: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse { path: source.to_path_buf(), line, msg: e.message().to_string() }
        })
    }

    pub fn from_json(text: &str, source: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { path: source.to_path_buf(), line: e.line(), msg: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text, path)
        } else {
            Self::from_toml(&text, path)
        }
    }

    /// Process spec with the master seed applied.
    pub fn seeded_process(&self) -> ProcessSpec {
        self.process.clone().with_seed(self.seed)
    }

    /// Every violated constraint; empty for a runnable config.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.id.trim().is_empty() {
            out.push("id must not be empty".into());
        }
        if self.replications == 0 {
            out.push("replications must be at least 1".into());
        }
        if self.workers == Some(0) {
            out.push("workers must be at least 1".into());
        }
        out.extend(self.process.problems().into_iter().map(|p| format!("process: {p}")));
        let spec = &self.process;
        let d = spec.dim;
        let stub = matches!(spec.kind, ProcessKind::Constant | ProcessKind::Linear);
        let h = spec.effective_hurst();
        let mut admissible = |alpha: f64, beta: Option<f64>| {
            if !stub && spec.problems().is_empty() {
                if let Err(r) = check_admissible(h, d, alpha, beta) {
                    out.push(format!("inadmissible: {r} [condition: {}]", r.condition()));
                }
            }
        };
        match &self.operation {
            Operation::Simulate { .. } => {}
            Operation::Potential { alpha, .. } => {
                if !(*alpha > 0.0 && *alpha < d as f64) {
                    admissible(*alpha, None);
                }
            }
            Operation::Limits { .. } => {}
            Operation::SupLScaling { alpha, .. } => admissible(*alpha, None),
            Operation::LowerOscillation { alpha_for_correction, .. } => admissible(*alpha_for_correction, None),
            Operation::Modulus { .. } => {}
            Operation::PotentialFieldHolder { alpha, beta_incr, .. } => admissible(*alpha, Some(*beta_incr)),
            Operation::Oracle { check } => match check {
                OracleCheck::Tail { alpha, .. } => admissible(*alpha, None),
                OracleCheck::AssumptionI { .. } | OracleCheck::Lnd { .. } => {
                    if !matches!(spec.kind, ProcessKind::Fbm | ProcessKind::Brownian) {
                        out.push(format!("{:?} sweeps need a Gaussian process, got {}", check, spec.kind.label()));
                    }
                }
                _ => {}
            },
        }
        self.operation_problems(&mut out);
        out
    }

    fn operation_problems(&self, out: &mut Vec<String>) {
        let spec = &self.process;
        let d = spec.dim;
        let t = spec.horizon;
        let check_points = |points: &[Vec<f64>], out: &mut Vec<String>| {
            if points.is_empty() {
                out.push("points must not be empty".into());
            }
            for (i, p) in points.iter().enumerate() {
                if p.len() != d {
                    out.push(format!("points[{i}] has {} coordinates, dim is {d}", p.len()));
                }
            }
        };
        let check_radii = |r: [i32; 2], out: &mut Vec<String>| {
            if !(r[0] >= 0 && r[1] > r[0]) {
                out.push(format!("radii exponents {r:?} must satisfy 0 <= a < b"));
            }
        };
        match &self.operation {
            Operation::Simulate { .. } => {}
            Operation::Potential { points, interval, .. } => {
                check_points(points, out);
                if let Some([a, b]) = interval {
                    if !(0.0 <= *a && a < b && *b <= t) {
                        out.push(format!("interval [{a}, {b}] outside [0, {t}]"));
                    }
                }
            }
            Operation::Limits { limit, points, s_order, grid } => {
                check_points(points, out);
                if *limit != LimitKind::AlphaToZero && s_order.is_none() {
                    out.push(format!("{limit:?} needs s_order"));
                }
                if let Some(g) = grid {
                    if g.is_empty() || g.windows(2).any(|w| !(w[1] < w[0])) || g.iter().any(|&v| !(v > 0.0)) {
                        out.push("grid must be positive and strictly decreasing".into());
                    }
                }
            }
            Operation::SupLScaling { t_center, radii, .. } | Operation::LowerOscillation { t_center, radii, .. } => {
                check_radii(*radii, out);
                let room = t_center.min(t - t_center);
                if radii[0] >= 0 && 0.5f64.powi(radii[0]) > room {
                    out.push(format!("largest radius 2^-{} exceeds min(t, T - t) = {room}", radii[0]));
                }
            }
            Operation::Modulus { radii, max_spread } => {
                check_radii(*radii, out);
                if !(*max_spread > 1.0) {
                    out.push("max_spread must exceed 1".into());
                }
            }
            Operation::PotentialFieldHolder { x_grid, t_grid, .. } => {
                check_points(x_grid, out);
                if x_grid.len() < 3 || t_grid.len() < 3 {
                    out.push("x_grid and t_grid need at least 3 points".into());
                }
                if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|&s| !(s > 0.0 && s <= t)) {
                    out.push(format!("t_grid must be increasing within (0, {t}]"));
                }
            }
            Operation::Oracle { check } => {
                if let OracleCheck::Moment { p_grid, .. } = check {
                    if p_grid.iter().any(|&p| !(1.0..=12.0).contains(&p)) {
                        out.push("moment orders must lie in [1, 12]".into());
                    }
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUP: &str = r#"
id = "sup"
seed = 3
replications = 4

[process]
kind = "brownian"
dim = 1
n_steps = 1024

[operation]
name = "sup_l_scaling"
alpha = 0.3
radii = [3, 8]
"#;

    #[test]
    fn toml_round_trip_through_json() {
        let cfg = ExperimentConfig::from_toml(SUP, Path::new("sup.toml")).unwrap();
        assert!(cfg.problems().is_empty(), "{:?}", cfg.problems());
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json, Path::new("x.json")).unwrap(), cfg);
    }

    #[test]
    fn every_problem_is_listed() {
        let text = SUP.replace("kind = \"brownian\"", "kind = \"fbm\"\nhurst = 0.6").replace("dim = 1", "dim = 2").replace("alpha = 0.3", "alpha = 0.0").replace("replications = 4", "replications = 0");
        let cfg = ExperimentConfig::from_toml(&text, Path::new("bad.toml")).unwrap();
        let p = cfg.problems();
        assert_eq!(p.len(), 2, "{p:?}");
        assert!(p.iter().any(|m| m.contains("d - 1/H")));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = SUP.replace("n_steps = 1024", "n_steps = \"many\"");
        match ExperimentConfig::from_toml(&text, Path::new("c.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
    }
}
