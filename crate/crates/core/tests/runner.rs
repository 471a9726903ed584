use std::fs;
use std::path::Path;

use occuriesz::runner::{self, emit_plotdata, ExperimentConfig, PlotOptions};
use occuriesz::Error;

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(text, Path::new("test.toml")).unwrap();
    cfg.out = out.to_path_buf();
    cfg
}

const SUP: &str = r#"
id = "sup"
seed = 12
replications = 50

[process]
kind = "brownian"
dim = 1
n_steps = 4096

[operation]
name = "sup_l_scaling"
alpha = 0.3
radii = [3, 7]
max_sites = 32
"#;

const LIMITS: &str = r#"
id = "limits"
seed = 2
replications = 3

[process]
kind = "brownian"
dim = 1
n_steps = 8192

[operation]
name = "limits"
limit = "alpha_to_zero"
points = [[0.0], [0.1]]
"#;

#[test]
fn sup_run_writes_fit_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(SUP, dir.path());
    let manifest = runner::run(&cfg).unwrap();
    let names: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(names, ["fit.json", "per_replication.csv", "summary.json"]);
    assert_eq!(manifest.replication_seeds.len(), 50);
    assert!(manifest.failed_replications.is_empty());
    assert!(dir.path().join(runner::MANIFEST_FILE).exists());
}

#[test]
fn replays_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(LIMITS, &dir.path().join("base"));
    cfg.workers = Some(3);
    let manifest = runner::run(&cfg).unwrap();
    for workers in [1, 8] {
        let out = dir.path().join(format!("w{workers}"));
        let fresh = runner::replay(&manifest, Some(&out), Some(workers)).unwrap();
        assert_eq!(fresh.files, manifest.files);
        assert_eq!(fresh.wall_clock.workers, workers);
    }
}

#[test]
fn single_replication_replay_and_mutated_seed() {
    let dir = tempfile::tempdir().unwrap();
    let text = LIMITS.replace("replications = 3", "replications = 1");
    let manifest = runner::run(&config(&text, dir.path())).unwrap();
    runner::replay(&manifest, None, None).unwrap();

    let mut tampered = manifest.clone();
    tampered.config.seed += 1;
    match runner::replay(&tampered, Some(&dir.path().join("t")), None) {
        Err(Error::Reproducibility(diff)) => assert!(diff.contains("limits.json"), "{diff}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn inadmissible_config_is_rejected_before_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let text = SUP
        .replace("kind = \"brownian\"", "kind = \"fbm\"\nhurst = 0.6")
        .replace("dim = 1", "dim = 2")
        .replace("alpha = 0.3", "alpha = 0.0");
    let out = dir.path().join("never");
    match runner::run(&config(&text, &out)) {
        Err(Error::Validation(problems)) => {
            assert_eq!(problems.len(), 1);
            assert!(problems[0].contains("d - 1/H"), "{problems:?}");
        }
        other => panic!("{other:?}"),
    }
    assert!(!out.exists());
}

#[test]
fn plotdata_for_fits_limits_and_empty_inputs() {
    let dir = tempfile::tempdir().unwrap();
    runner::run(&config(SUP, &dir.path().join("sup"))).unwrap();
    runner::run(&config(LIMITS, &dir.path().join("lim"))).unwrap();
    let out = dir.path().join("plots");
    emit_plotdata(&[dir.path().join("sup/fit.json"), dir.path().join("lim/limits.json")], &out, PlotOptions::default()).unwrap();

    let fit = fs::read_to_string(out.join("fit.dat")).unwrap();
    assert!(fit.contains("# series: points") && fit.contains("# series: fit"));
    let limits = fs::read_to_string(out.join("limits.dat")).unwrap();
    assert_eq!(limits.matches("# series: sequence").count(), 6);

    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"radii": [], "statistics": []}"#).unwrap();
    emit_plotdata(&[empty], &out, PlotOptions { svg: true }).unwrap();
    assert_eq!(fs::read_to_string(out.join("empty.dat")).unwrap(), "# no data\n");
}
