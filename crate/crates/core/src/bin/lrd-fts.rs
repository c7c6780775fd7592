use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrd_fts::harness::{
    execute, ExperimentConfig, ExperimentKind, HarnessError, OutputFormat, RunReport, VerdictStatus,
};

#[derive(Parser)]
#[command(
    name = "lrd-fts",
    version,
    about = "Simulate, estimate and check long-memory functional time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate sample paths and write them with JSON sidecars.
    Simulate(Common),
    /// Estimate θ from a sample CSV or a simulated path.
    Estimate(Common),
    /// Integrated bias of the expected periodogram over increasing T.
    BiasDecay(Common),
    /// Covariance tail against the long-memory asymptote.
    CovTail(Common),
    /// Replicated estimation error over increasing T.
    McConsistency(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `output_dir` from the config, then `./out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the sample output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn run(kind: ExperimentKind, args: Common) -> Result<RunReport, HarnessError> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if cfg.experiment != kind {
        return Err(HarnessError::Config(format!(
            "{} is a {:?} config, not {kind:?}",
            args.config.display(),
            cfg.experiment
        )));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(format) = args.format {
        cfg.format = format;
    }
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(HarnessError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    let report = execute(&cfg, &out)?;
    println!(
        "{:?}: config {} -> {}",
        report.experiment,
        &report.config_hash[..12],
        out.display()
    );
    if let Some(summary) = &report.summary {
        println!("{summary}");
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for v in &report.verdicts {
        let tag = match v.status {
            VerdictStatus::Pass => "PASS",
            VerdictStatus::Fail => "FAIL",
            VerdictStatus::InsufficientPoints => "INSUFFICIENT POINTS",
            VerdictStatus::InsufficientReplicates => "INSUFFICIENT REPLICATES",
        };
        println!("{tag} {}: {}", v.criterion, v.detail);
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Estimate(a) => (ExperimentKind::Estimate, a),
        Command::BiasDecay(a) => (ExperimentKind::BiasDecay, a),
        Command::CovTail(a) => (ExperimentKind::CovTail, a),
        Command::McConsistency(a) => (ExperimentKind::McConsistency, a),
    };
    match run(kind, args) {
        Ok(report) => ExitCode::from(report.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
