use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use occuriesz::runner::{self, ExperimentConfig, ExperimentManifest, Family, PlotOptions};
use occuriesz::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_CHECKS: u8 = 3;
const EXIT_REPRODUCIBILITY: u8 = 4;

#[derive(Parser)]
#[command(name = "occuriesz", version, about = "Occupation-measure Riesz potential experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths and write them as CSV or binary files.
    Simulate(RunArgs),
    /// Riesz potential profile of the occupation measure at chosen points.
    Potential(RunArgs),
    /// Alpha-to-zero, varying-order and average-density limits.
    Limits(RunArgs),
    /// Scaling fits: sup-potential, lower oscillation, modulus, Hölder field.
    Regularity(RunArgs),
    /// Assumption checks, analytic identities and bound sweeps.
    Oracle(RunArgs),
    /// Re-run a manifest and compare checksums.
    Replay {
        manifest: PathBuf,
        #[arg(long, env = "OCCURIESZ_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn result JSON files into plot-ready data files.
    Plotdata {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also render a minimal SVG per input.
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "OCCURIESZ_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::Parse { .. } | Error::Inadmissible(_) | Error::Parameter(_) | Error::AlphaZeroRedirect => {
            EXIT_VALIDATION
        }
        Error::Reproducibility(_) => EXIT_REPRODUCIBILITY,
        _ => 1,
    }
}

fn run_family(family: Family, args: RunArgs) -> Result<ExitCode, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.operation.family() != family {
        return Err(Error::Validation(vec![format!(
            "operation `{}` does not belong to this subcommand",
            cfg.operation.label()
        )]));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    let manifest = runner::run(&cfg)?;
    report(&cfg.out, &manifest)
}

fn report(out: &std::path::Path, manifest: &ExperimentManifest) -> Result<ExitCode, Error> {
    println!("wrote {} file(s) to {}", manifest.files.len(), out.display());
    if !manifest.failed_replications.is_empty() {
        println!("failed replications: {:?}", manifest.failed_replications);
    }
    let summary = runner::load_summary(out)?;
    for c in &summary.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if summary.all_passed() && manifest.failed_replications.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECKS)
    })
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate(a) => run_family(Family::Simulate, a),
        Command::Potential(a) => run_family(Family::Potential, a),
        Command::Limits(a) => run_family(Family::Limits, a),
        Command::Regularity(a) => run_family(Family::Regularity, a),
        Command::Oracle(a) => run_family(Family::Oracle, a),
        Command::Replay { manifest, workers, out } => {
            let recorded = ExperimentManifest::load(&manifest)?;
            let fresh = runner::replay(&recorded, out.as_deref(), workers)?;
            let dir = out.unwrap_or_else(|| recorded.config.out.join("replay"));
            println!("replay matches: {} file(s) identical", fresh.files.len());
            report(&dir, &fresh)
        }
        Command::Plotdata { files, out, svg } => {
            for p in runner::emit_plotdata(&files, &out, PlotOptions { svg })? {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
