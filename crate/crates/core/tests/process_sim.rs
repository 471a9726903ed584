use occuriesz::process_sim::{ProcessKind, ProcessSpec, Sampler};
use occuriesz::rng::aux_stream;
use occuriesz::stats;
use proptest::prelude::*;
use rand::Rng;

fn spec_of(kind: ProcessKind, dim: usize, n: usize) -> ProcessSpec {
    match kind {
        ProcessKind::Fbm => ProcessSpec::fbm(0.7, dim, n),
        ProcessKind::Brownian => ProcessSpec::brownian(dim, n),
        ProcessKind::Rosenblatt => ProcessSpec { micro_steps: 16, ..ProcessSpec::rosenblatt(0.75, dim, n) },
        ProcessKind::StableSym => ProcessSpec::stable(1.5, dim, n),
        _ => ProcessSpec::linear(dim, n),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn same_spec_and_seed_give_identical_bits(
        kind in prop::sample::select(vec![ProcessKind::Fbm, ProcessKind::Brownian, ProcessKind::Rosenblatt, ProcessKind::StableSym]),
        dim in 1usize..=3,
        log_n in 4u32..=9,
        seed in any::<u64>(),
        rep in 0u64..1000,
    ) {
        let spec = spec_of(kind, dim, 1 << log_n).with_seed(seed);
        let a = Sampler::new(&spec).unwrap().sample(rep).unwrap();
        let b = Sampler::new(&spec).unwrap().sample(rep).unwrap();
        prop_assert!(a.positions().iter().zip(b.positions()).all(|(x, y)| x.to_bits() == y.to_bits()));
        prop_assert!(a.validate().is_ok());
        prop_assert_eq!(a.len(), (1 << log_n) + 1);
        prop_assert!(a.point(0).iter().all(|&v| v == 0.0));
    }
}

fn fbm_cov(h: f64, s: f64, t: f64) -> f64 {
    0.5 * (s.powf(2.0 * h) + t.powf(2.0 * h) - (t - s).abs().powf(2.0 * h))
}

#[test]
fn fbm_grid_covariance_matches_within_three_sigma() {
    let n = 256;
    let reps = 4000;
    for h in [0.3, 0.75] {
        let sampler = Sampler::new(&ProcessSpec::fbm(h, 1, n).with_seed(21)).unwrap();
        let paths: Vec<Vec<f64>> = (0..reps).map(|r| sampler.sample(r).unwrap().positions().to_vec()).collect();
        let mut rng = aux_stream(5, 1);
        for _ in 0..20 {
            let i = rng.random_range(1..=n);
            let j = rng.random_range(1..=n);
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            let prods: Vec<f64> = paths.iter().map(|p| p[i] * p[j]).collect();
            let est = stats::mean(&prods);
            let se = (stats::variance(&prods) / reps as f64).sqrt();
            let exact = fbm_cov(h, s, t);
            assert!((est - exact).abs() < 3.0 * se, "H={h} ({s},{t}): {est} vs {exact} ± {se}");
        }
    }
}

fn increments_at(spec: &ProcessSpec, reps: u64, t_index: usize, lag: usize) -> Vec<f64> {
    let sampler = Sampler::new(spec).unwrap();
    (0..reps)
        .map(|r| {
            let p = sampler.sample(r).unwrap();
            p.point(t_index + lag)[0] - p.point(t_index)[0]
        })
        .collect()
}

#[test]
fn increments_are_stationary_for_fbm_and_stable() {
    let n = 512;
    for spec in [ProcessSpec::fbm(0.3, 1, n).with_seed(2), ProcessSpec::stable(1.2, 1, n).with_seed(3)] {
        let groups: Vec<Vec<f64>> = [50, 200, 400].iter().map(|&t| increments_at(&spec, 1500, t, 25)).collect();
        for a in 0..3 {
            for b in a + 1..3 {
                let (_, p) = stats::ks_two_sample(&groups[a], &groups[b]);
                assert!(p > 1e-3, "{:?}: groups {a},{b} p = {p}", spec.kind);
            }
        }
    }
}

#[test]
fn brownian_increment_variance_is_the_lag() {
    let inc = increments_at(&ProcessSpec::brownian(1, 1024).with_seed(8), 4000, 300, 64);
    let v = stats::variance(&inc);
    let se = v * (2.0 / 4000f64).sqrt();
    assert!((v - 1.0 / 16.0).abs() < 3.0 * se, "{v}");
}
