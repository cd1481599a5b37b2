use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spr_lab_cli::config::{
    BasisParams, CheckParams, IdentityParams, ReproduceParams, RetrieveParams, SidonParams,
    StabilityParams,
};
use spr_lab_cli::{configure_threads, run, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "spr-lab", version, about = "Stable phase retrieval experiments")]
struct Cli {
    /// Worker threads; falls back to SPR_LAB_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a basis and write its manifest and element files.
    Basis(BasisParams),
    /// Check orthogonality and moment hypotheses of a basis.
    Check(CheckParams),
    /// Generate a B2/B3 sequence or a perfect difference set.
    Sidon(SidonParams),
    /// Recover coefficients from a sampled modulus.
    Retrieve(RetrieveParams),
    /// Estimate stability ratios.
    Stability(StabilityParams),
    /// Evaluate the expansion identities on random pairs.
    Identity(IdentityParams),
    /// Rebuild a known example or counterexample and check its verdict.
    ReproduceExample(ReproduceParams),
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn to_config(command: Command) -> Result<ExperimentConfig, CliError> {
    Ok(match command {
        Command::Basis(p) => ExperimentConfig::Basis(p),
        Command::Check(p) => ExperimentConfig::Check(p),
        Command::Sidon(p) => ExperimentConfig::Sidon(p),
        Command::Retrieve(p) => ExperimentConfig::Retrieve(p),
        Command::Stability(p) => ExperimentConfig::Stability(p),
        Command::Identity(p) => ExperimentConfig::Identity(p),
        Command::ReproduceExample(p) => ExperimentConfig::ReproduceExample(p),
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", config.display())))?;
            ExperimentConfig::from_json(&text)?
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|()| to_config(cli.command)).and_then(|c| run(&c));
    match result {
        Ok(outcome) => {
            if let Some(text) = outcome.stdout {
                print!("{text}");
            }
            if let Some(msg) = outcome.message {
                eprintln!("spr-lab: {msg}");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("spr-lab: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
