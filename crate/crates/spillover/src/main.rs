//! Command-line interface for the spillover pipeline.
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for data
//! errors, 3 for numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spillover::pipeline::{
    run_diagnostics, run_dynamic, run_static, AnalysisConfig, ErrorKind, LagSpec, PipelineError,
    RunReport,
};

#[derive(Parser)]
#[command(name = "spillover", version, about = "Spillover connectedness analysis for monthly price panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full-sample spillover tables, frequency bands, and networks.
    Static(RunArgs),
    /// Month-by-month spillover series from a time-varying model.
    Dynamic(RunArgs),
    /// Descriptive statistics, normality and unit-root tests.
    Diagnostics(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the forecast horizon (months).
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the lag order: a positive integer or "aic".
    #[arg(long)]
    lag: Option<String>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the recorded seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(args: &RunArgs) -> Result<AnalysisConfig, PipelineError> {
    let mut config = AnalysisConfig::from_file(&args.config)?;
    if let Some(horizon) = args.horizon {
        if horizon == 0 {
            return Err(PipelineError {
                kind: ErrorKind::Config,
                stage: "config".to_string(),
                message: "horizon must be at least 1".to_string(),
            });
        }
        config.horizon = horizon;
    }
    if let Some(lag) = &args.lag {
        config.lag = LagSpec::parse(lag).map_err(|message| PipelineError {
            kind: ErrorKind::Config,
            stage: "config".to_string(),
            message,
        })?;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(RunReport, &'static str, PathBuf), PipelineError> {
    let (args, label): (&RunArgs, &'static str) = match &cli.command {
        Command::Static(args) => (args, "static"),
        Command::Dynamic(args) => (args, "dynamic"),
        Command::Diagnostics(args) => (args, "diagnostics"),
    };
    let config = load_config(args)?;
    let out_dir = config.output_dir.clone();
    let report = match &cli.command {
        Command::Static(_) => run_static(&config)?,
        Command::Dynamic(_) => run_dynamic(&config)?,
        Command::Diagnostics(_) => run_diagnostics(&config)?,
    };
    Ok((report, label, out_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, label, out_dir)) => {
            println!(
                "{label}: wrote {} file(s) to {} ({} series, {} observations)",
                report.outputs.len() + 1,
                out_dir.display(),
                report.settings.series.len(),
                report.settings.n_obs,
            );
            if !report.gaps.is_empty() {
                eprintln!("warning: {} month(s) skipped; see run_report.json", report.gaps.len());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
