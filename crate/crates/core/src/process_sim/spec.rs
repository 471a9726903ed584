use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::process_sim::sde::SdeModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Fbm,
    Brownian,
    Rosenblatt,
    StableSym,
    YoungSde,
    /// Deterministic `X_t = x0` path used as a stub in negative controls.
    Constant,
    /// Deterministic `X_t = t · (1, …, 1)` path.
    Linear,
}

impl ProcessKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Fbm => "fbm",
            Self::Brownian => "brownian",
            Self::Rosenblatt => "rosenblatt",
            Self::StableSym => "stable_sym",
            Self::YoungSde => "young_sde",
            Self::Constant => "constant",
            Self::Linear => "linear",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Self::Fbm => 0,
            Self::Brownian => 1,
            Self::Rosenblatt => 2,
            Self::StableSym => 3,
            Self::YoungSde => 4,
            Self::Constant => 5,
            Self::Linear => 6,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => Self::Fbm,
            1 => Self::Brownian,
            2 => Self::Rosenblatt,
            3 => Self::StableSym,
            4 => Self::YoungSde,
            5 => Self::Constant,
            6 => Self::Linear,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeSpec {
    pub x0: Vec<f64>,
    pub model: SdeModel,
}

/// Declarative recipe for one process class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    #[serde(default)]
    pub hurst: Option<f64>,
    #[serde(default)]
    pub beta_stable: Option<f64>,
    pub dim: usize,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Micro-steps per output step for the Rosenblatt construction.
    #[serde(default = "default_micro")]
    pub micro_steps: usize,
    #[serde(default)]
    pub sde: Option<SdeSpec>,
}

fn one() -> f64 {
    1.0
}

fn default_micro() -> usize {
    crate::process_sim::rosenblatt::DEFAULT_MICRO_STEPS
}

impl ProcessSpec {
    fn base(kind: ProcessKind, dim: usize, n_steps: usize) -> Self {
        Self {
            kind,
            hurst: None,
            beta_stable: None,
            dim,
            n_steps,
            horizon: 1.0,
            seed: 0,
            micro_steps: default_micro(),
            sde: None,
        }
    }

    pub fn fbm(hurst: f64, dim: usize, n_steps: usize) -> Self {
        Self { hurst: Some(hurst), ..Self::base(ProcessKind::Fbm, dim, n_steps) }
    }

    pub fn brownian(dim: usize, n_steps: usize) -> Self {
        Self { hurst: Some(0.5), ..Self::base(ProcessKind::Brownian, dim, n_steps) }
    }

    pub fn rosenblatt(hurst: f64, dim: usize, n_steps: usize) -> Self {
        Self { hurst: Some(hurst), ..Self::base(ProcessKind::Rosenblatt, dim, n_steps) }
    }

    pub fn stable(beta: f64, dim: usize, n_steps: usize) -> Self {
        Self { beta_stable: Some(beta), ..Self::base(ProcessKind::StableSym, dim, n_steps) }
    }

    pub fn young_sde(hurst: f64, n_steps: usize, x0: Vec<f64>, model: SdeModel) -> Self {
        let dim = x0.len();
        Self {
            hurst: Some(hurst),
            sde: Some(SdeSpec { x0, model }),
            ..Self::base(ProcessKind::YoungSde, dim, n_steps)
        }
    }

    pub fn constant(dim: usize, n_steps: usize) -> Self {
        Self::base(ProcessKind::Constant, dim, n_steps)
    }

    pub fn linear(dim: usize, n_steps: usize) -> Self {
        Self::base(ProcessKind::Linear, dim, n_steps)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Hurst index driving path roughness. Brownian and SDE paths report 1/2
    /// and H respectively; stable paths report `min(1/β, 1)`; smooth stubs 1.
    pub fn effective_hurst(&self) -> f64 {
        match self.kind {
            ProcessKind::Brownian => 0.5,
            ProcessKind::StableSym => (1.0 / self.beta_stable.unwrap_or(2.0)).min(1.0),
            ProcessKind::Constant | ProcessKind::Linear => 1.0,
            _ => self.hurst.unwrap_or(0.5),
        }
    }

    /// Exponent `θ` of the characteristic-function bound for this class, with
    /// `δ` for the SDE case fixed at 1.
    pub fn theta(&self) -> f64 {
        match self.kind {
            ProcessKind::YoungSde => (8.0 * self.dim as f64 + 1.0) / self.effective_hurst(),
            _ => 0.0,
        }
    }

    /// Moment-growth exponent `ι` for this class.
    pub fn iota(&self) -> f64 {
        match self.kind {
            ProcessKind::Rosenblatt => 1.0,
            _ => 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.problems().into_iter().next().map_or(Ok(()), |p| Err(param(p)))
    }

    /// Every violated constraint, for config validation.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dim == 0 {
            out.push("dim must be at least 1".to_string());
        }
        if self.n_steps < 2 {
            out.push(format!("n_steps = {} must be at least 2", self.n_steps));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push(format!("horizon T = {} must be positive and finite", self.horizon));
        }
        let h = self.hurst;
        let in_unit = |h: f64| h > 0.0 && h < 1.0;
        match self.kind {
            ProcessKind::Fbm => match h {
                Some(h) if in_unit(h) => {}
                _ => out.push(format!("fbm needs H in (0, 1), got {h:?}")),
            },
            ProcessKind::Brownian => {
                if h.is_some_and(|h| h != 0.5) {
                    out.push("brownian fixes H = 1/2".to_string());
                }
            }
            ProcessKind::Rosenblatt => {
                match h {
                    Some(h) if h > 0.5 && h < 1.0 => {}
                    _ => out.push(format!("rosenblatt needs H in (1/2, 1), got {h:?}")),
                }
                if self.micro_steps < 2 {
                    out.push("rosenblatt needs at least 2 micro-steps per output step".to_string());
                }
            }
            ProcessKind::StableSym => match self.beta_stable {
                Some(b) if b > 0.0 && b <= 2.0 => {}
                b => out.push(format!("stable_sym needs beta_stable in (0, 2], got {b:?}")),
            },
            ProcessKind::YoungSde => {
                match h {
                    Some(h) if (0.5..1.0).contains(&h) => {}
                    Some(h) if h > 0.0 && h < 0.5 => out.push(format!(
                        "young_sde needs H >= 1/2 (rough-path regime H = {h} is not supported)"
                    )),
                    _ => out.push(format!("young_sde needs H in [1/2, 1), got {h:?}")),
                }
                match &self.sde {
                    None => out.push("young_sde needs an sde block (x0, model)".to_string()),
                    Some(s) if s.x0.len() != self.dim => {
                        out.push(format!("sde x0 has {} coordinates, dim is {}", s.x0.len(), self.dim))
                    }
                    Some(s) => {
                        if let Err(e) = s.model.check_dim(self.dim) {
                            out.push(e.to_string());
                        }
                    }
                }
            }
            ProcessKind::Constant | ProcessKind::Linear => {}
        }
        out
    }
}
