//! Sample-path generation for every supported process class.

pub mod fbm;
pub mod io;
pub mod path;
pub mod rosenblatt;
pub mod sde;
pub mod spec;
pub mod stable;

pub use fbm::FbmGenerator;
pub use path::SamplePath;
pub use rosenblatt::RosenblattGenerator;
pub use sde::{SdeModel, VectorFields};
pub use spec::{ProcessKind, ProcessSpec, SdeSpec};

use crate::error::{param, Result};
use crate::rng::stream;

enum Engine {
    Fbm(FbmGenerator),
    Rosenblatt(RosenblattGenerator),
    Stable,
    Deterministic,
}

/// A validated spec plus any precomputed synthesis state, so that many
/// replications share one FFT setup. Replication `rep` draws coordinate `l`
/// from stream `(spec.seed, rep, l)`.
pub struct Sampler {
    spec: ProcessSpec,
    engine: Engine,
}

impl Sampler {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let engine = match spec.kind {
            ProcessKind::Fbm | ProcessKind::Brownian | ProcessKind::YoungSde => {
                Engine::Fbm(FbmGenerator::new(spec.effective_hurst(), spec.n_steps)?)
            }
            ProcessKind::Rosenblatt => Engine::Rosenblatt(RosenblattGenerator::new(
                spec.effective_hurst(),
                spec.n_steps,
                spec.micro_steps,
            )?),
            ProcessKind::StableSym => Engine::Stable,
            ProcessKind::Constant | ProcessKind::Linear => Engine::Deterministic,
        };
        Ok(Self { spec: spec.clone(), engine })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn sample(&self, rep: u64) -> Result<SamplePath> {
        let spec = &self.spec;
        let (n, d, horizon) = (spec.n_steps, spec.dim, spec.horizon);
        let mut cols = vec![vec![0.0; n + 1]; d];
        for (l, col) in cols.iter_mut().enumerate() {
            let mut rng = stream(spec.seed, rep, l as u64);
            match &self.engine {
                Engine::Fbm(g) => g.sample_path(&mut rng, horizon, col),
                Engine::Rosenblatt(g) => g.sample_path(&mut rng, horizon, spec.effective_hurst(), col),
                Engine::Stable => stable::sample_path(&mut rng, spec.beta_stable.unwrap_or(2.0), horizon, col),
                Engine::Deterministic => {
                    if spec.kind == ProcessKind::Linear {
                        for (k, v) in col.iter_mut().enumerate() {
                            *v = k as f64 * horizon / n as f64;
                        }
                    }
                }
            }
        }
        let hint = Some(spec.effective_hurst());
        let path = SamplePath::from_fn(n, horizon, d, hint, |i, _, x| {
            for (l, v) in x.iter_mut().enumerate() {
                *v = cols[l][i];
            }
        })?;
        if spec.kind == ProcessKind::YoungSde {
            solve_young_sde(spec, &path)
        } else {
            Ok(path)
        }
    }
}

/// Sample replication 0 of any process class.
pub fn simulate(spec: &ProcessSpec) -> Result<SamplePath> {
    Sampler::new(spec)?.sample(0)
}

fn expect_kind(spec: &ProcessSpec, kinds: &[ProcessKind]) -> Result<()> {
    if kinds.contains(&spec.kind) {
        Ok(())
    } else {
        Err(param(format!("expected a {} spec, got {}", kinds[0].label(), spec.kind.label())))
    }
}

pub fn simulate_fbm(spec: &ProcessSpec) -> Result<SamplePath> {
    expect_kind(spec, &[ProcessKind::Fbm, ProcessKind::Brownian])?;
    simulate(spec)
}

pub fn simulate_rosenblatt(spec: &ProcessSpec) -> Result<SamplePath> {
    expect_kind(spec, &[ProcessKind::Rosenblatt])?;
    simulate(spec)
}

pub fn simulate_stable(spec: &ProcessSpec) -> Result<SamplePath> {
    expect_kind(spec, &[ProcessKind::StableSym])?;
    simulate(spec)
}

/// Solve the SDE described by `spec` along `driver`.
pub fn solve_young_sde(spec: &ProcessSpec, driver: &SamplePath) -> Result<SamplePath> {
    expect_kind(spec, &[ProcessKind::YoungSde])?;
    let hurst = spec.hurst.ok_or_else(|| param("young_sde needs H"))?;
    sde::Scheme::for_hurst(hurst)?;
    spec.validate()?;
    let sde = spec.sde.as_ref().expect("validated spec has an sde block");
    sde::solve(&sde.model, &sde.x0, driver, hurst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bits() {
        for spec in [
            ProcessSpec::fbm(0.7, 2, 256).with_seed(9),
            ProcessSpec::rosenblatt(0.7, 1, 16).with_seed(9),
            ProcessSpec::stable(1.3, 3, 100).with_seed(9),
        ] {
            let s = Sampler::new(&spec).unwrap();
            assert_eq!(s.sample(0).unwrap(), simulate(&spec).unwrap());
            assert_eq!(s.sample(4).unwrap(), Sampler::new(&spec).unwrap().sample(4).unwrap());
            assert_ne!(s.sample(4).unwrap(), s.sample(5).unwrap());
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        assert!(simulate_stable(&ProcessSpec::fbm(0.5, 1, 8)).is_err());
        assert!(simulate_rosenblatt(&ProcessSpec::rosenblatt(0.4, 1, 8)).is_err());
        assert!(simulate_fbm(&ProcessSpec::fbm(0.5, 1, 100)).is_err());
    }

    #[test]
    fn sde_regime_guard() {
        let mut spec = ProcessSpec::young_sde(0.75, 64, vec![1.0], SdeModel::Additive { dim: 1 });
        let driver = simulate(&ProcessSpec::fbm(0.75, 1, 64)).unwrap();
        let sol = solve_young_sde(&spec, &driver).unwrap();
        assert!((sol.point(64)[0] - 1.0 - driver.point(64)[0]).abs() < 1e-12);
        spec.hurst = Some(0.3);
        assert!(matches!(solve_young_sde(&spec, &driver), Err(crate::Error::UnsupportedRegime { .. })));
    }
}
