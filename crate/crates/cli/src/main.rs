use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mellin_sampling::kernels::{certify_kernel, CertifyOptions, KernelDescriptor};
use mellin_sampling::report::{list_registry, run_experiment, ExperimentConfig, OUTPUT_DIR_ENV};

/// Experiments with exponential sampling series.
#[derive(Parser)]
#[command(name = "mellin-sampling", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the probes of a JSON experiment config and write artifacts.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// List kernel families and registered test functions.
    List,
    /// Certify a kernel such as `bspline(3)` or `jackson(1,2)` and print the certificate.
    Certify { kernel: String },
}

/// Exit 1: a probe contract was violated.
const EXIT_VIOLATION: u8 = 1;
/// Exit 2: bad config or I/O failure.
const EXIT_USAGE: u8 = 2;

fn output_dir(flag: Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone())
}

fn run(path: &Path, flag: Option<PathBuf>) -> Result<bool> {
    let config = ExperimentConfig::load(path)?;
    let report = run_experiment(&config)?;
    let dir = output_dir(flag, &config);
    report
        .write_to(&dir)
        .with_context(|| format!("writing artifacts to {}", dir.display()))?;
    for v in &report.summary.violations {
        eprintln!(
            "violation [{}{}]: {} (measured {:?}, required {:?})",
            v.probe,
            v.function.as_deref().map(|f| format!(" {f}")).unwrap_or_default(),
            v.assertion,
            v.measured,
            v.required
        );
    }
    println!(
        "{} probe(s), {} violation(s), artifacts in {}",
        report.summary.probes.len(),
        report.summary.violations.len(),
        dir.display()
    );
    Ok(report.summary.passed)
}

fn certify(descriptor: &str) -> Result<bool> {
    let kernel = descriptor.parse::<KernelDescriptor>()?.build()?;
    let opts = CertifyOptions::default();
    let report = certify_kernel(&kernel, &opts)?;
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    let m0_tolerance = if kernel.is_compact() { 1e-12 } else { 10.0 * opts.tail_tolerance };
    Ok(report.m1_is_constant && report.m0_sup_deviation <= m0_tolerance)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output_dir } => run(&config, output_dir),
        Command::List => {
            print!("{}", list_registry());
            Ok(true)
        }
        Command::Certify { kernel } => certify(&kernel),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
