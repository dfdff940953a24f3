//! `padesurf` command line.

use clap::{Args, Parser, Subcommand};
use padesurf_cli::{execute, ExperimentConfig, Overrides, Stage};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "padesurf", version, about = "Padé approximants on interval contours vs. their strong asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build (or load) the Riemann surface and its invariants.
    Surface(Common),
    /// Power-series coefficients of the Cauchy transform.
    Moments(Common),
    /// Padé denominators, zeros and orthogonality residuals.
    Pade(Common),
    /// Index classification, divisors and normalizing constants.
    Predict(Common),
    /// SA1 ratios, det N, jump residuals and decay fits.
    Verify(Common),
    /// Divisor points against Padé zeros.
    Poles(Common),
    /// Full pipeline.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    config: PathBuf,
    /// Index range `A..B` (inclusive).
    #[arg(long)]
    n: Option<String>,
    /// Working precision in bits.
    #[arg(long)]
    precision: Option<u32>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Ignore any cached surface.
    #[arg(long)]
    no_cache: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, c) = match cli.command {
        Command::Surface(c) => (Stage::Surface, c),
        Command::Moments(c) => (Stage::Moments, c),
        Command::Pade(c) => (Stage::Pade, c),
        Command::Predict(c) => (Stage::Predict, c),
        Command::Verify(c) => (Stage::Verify, c),
        Command::Poles(c) => (Stage::Poles, c),
        Command::Run(c) => (Stage::Run, c),
    };
    let overrides = Overrides { n: c.n, precision: c.precision, out: c.out, no_cache: c.no_cache };
    let result = ExperimentConfig::load(&c.config)
        .and_then(|cfg| cfg.materialize(&overrides))
        .and_then(|cfg| execute(stage, &cfg));
    match result {
        Ok(outcome) => {
            for s in &outcome.report.suites {
                let mark = if s.passed { "PASS" } else { "FAIL" };
                println!("{mark} {} worst={} tol={} {}", s.name, s.worst, s.tolerance, s.detail);
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
