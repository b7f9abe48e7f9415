use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use sfw_cli::{run_experiment, CliError, ExperimentSpec, Overrides};
use sfw_core::data::synthetic;

#[derive(Parser)]
#[command(name = "sfw", version, about = "Stochastic Frank-Wolfe experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a grid of (algorithm, seed) experiments and write CSV traces.
    Run(RunArgs),
    /// Write one of the built-in synthetic datasets in LibSVM format.
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    BreastCancer,
    Mushrooms,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment file. Without it `--dataset` is required.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// logistic or nlls
    #[arg(long)]
    loss: Option<String>,
    /// Comma-separated list, e.g. fw,sarah_fw,saga_sarah_fw,momentum_fw
    #[arg(long = "alg", value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    /// Iterations per run.
    #[arg(long = "K", conflicts_with = "epochs")]
    iterations: Option<u64>,
    /// Budget in passes over the data; converted to iterations per algorithm.
    #[arg(long)]
    epochs: Option<f64>,
    #[arg(long = "seed", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    gap_every: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Estimate f_min with a run ten times longer than the best one.
    #[arg(long)]
    reference: bool,
    /// Record elapsed time in the traces (makes output non-reproducible).
    #[arg(long)]
    wall_time: bool,
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => match &args.dataset {
            Some(d) => ExperimentSpec::new(d.clone()),
            None => return Err(CliError::Spec("either --config or --dataset is required".into())),
        },
    };
    Overrides {
        dataset: args.dataset,
        loss: args.loss,
        algorithms: args.algorithms,
        radius: args.radius,
        batch: args.batch,
        iterations: args.iterations,
        epochs: args.epochs,
        seeds: args.seeds,
        gap_every: args.gap_every,
        out: args.out,
        reference: args.reference,
        wall_time: args.wall_time,
    }
    .apply(&mut spec);

    let report = run_experiment(&spec)?;
    for r in &report.runs {
        println!(
            "{:<14} seed {:<4} K {:<8} f {:.6e}  min gap {}  sfo {}  -> {}",
            r.config.algorithm,
            r.config.seed,
            r.config.horizon,
            r.final_f,
            r.min_gap.map_or("-".to_string(), |g| format!("{g:.3e}")),
            r.sfo_total,
            r.csv.display(),
        );
    }
    if let Some(f_min) = report.f_min {
        println!("f_min {f_min:.16e}");
    }
    println!("summary -> {}", report.summary.display());
    Ok(())
}

fn synth(kind: SynthKind, seed: u64, out: PathBuf) -> anyhow::Result<()> {
    let ds = match kind {
        SynthKind::BreastCancer => synthetic::breast_cancer_like(seed),
        SynthKind::Mushrooms => synthetic::mushrooms_like(seed),
    };
    std::fs::write(&out, ds.to_libsvm()).with_context(|| format!("writing {}", out.display()))?;
    println!("{} rows, {} features -> {}", ds.n(), ds.dim(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Synth { kind, seed, out } => match synth(kind, seed, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
    }
}
