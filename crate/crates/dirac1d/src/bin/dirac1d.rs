//! Command-line front end: parse a TOML run configuration, dispatch the
//! experiment it describes, and exit with the verdict contract
//! (0 pass, 2 verdict failure, 3 configuration error, 4 numerical abort).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirac1d::config::{ExperimentKind, RunConfig};
use dirac1d::report::dispatch;
use dirac1d::verdict::Status;

#[derive(Parser)]
#[command(name = "dirac1d", version, about = "Split-step laboratory for cubic nonlinear Dirac systems on the line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's output.directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for every sampling stage.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Model checks only: null-structure residual and derived constants.
    Validate(CommonArgs),
    /// Single trajectory with functional diagnostics and verdicts.
    Run(CommonArgs),
    /// Two-solution stability experiment.
    Pair(CommonArgs),
    /// Cauchy-family convergence experiment.
    Cauchy(CommonArgs),
    /// Grid refinement study against the closed-form or finest level.
    Oracle(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Validate(a) => (ExperimentKind::Validate, a),
        Command::Run(a) => (ExperimentKind::Run, a),
        Command::Pair(a) => (ExperimentKind::Pair, a),
        Command::Cauchy(a) => (ExperimentKind::Cauchy, a),
        Command::Oracle(a) => (ExperimentKind::Oracle, a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(3);
        }
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.directory));

    match dispatch(&cfg, &out_dir, args.seed, Some(kind)) {
        Ok(outcome) => {
            for v in &outcome.summary.verdicts {
                let line = match v.status {
                    Status::NotApplicable => format!("{:<28} NOT-APPLICABLE  {}", v.name, v.detail),
                    _ => format!(
                        "{:<28} {:<6} observed {:.6e} vs bound {:.6e} (tol {:.3e})",
                        v.name,
                        v.status.to_string().to_uppercase(),
                        v.observed,
                        v.bound,
                        v.tolerance
                    ),
                };
                println!("{line}");
            }
            println!(
                "summary: {} pass / {} fail / {} not-applicable -> {}",
                outcome.summary.counts.passes,
                outcome.summary.counts.failures,
                outcome.summary.counts.not_applicable,
                out_dir.join("summary.json").display()
            );
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
