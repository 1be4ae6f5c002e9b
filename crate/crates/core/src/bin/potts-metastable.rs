use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use potts_metastable::io::{load_config, run, Command, ExperimentConfig};
use potts_metastable::Error;

#[derive(Parser)]
#[command(version, about = "Metastability experiments for the asymmetric three-state Potts model")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Experiment file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the JSON report and CSV dumps; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest state space that may be enumerated.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Comma-separated inverse temperatures.
    #[arg(long, global = true, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Exact energy-landscape report.
    Landscape,
    /// Replica estimates of hitting times.
    Simulate,
    /// Exact potentials, capacities and mean hitting times.
    Solve,
    /// Trace-process rates over the β list.
    Reduce,
    /// The acceptance suite; exit status 1 if any check fails.
    Verify,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut c = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(b) = cli.budget {
        c.budget = b;
    }
    if let Some(b) = &cli.beta {
        if b.is_empty() || b.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::Config(vec!["--beta must list finite non-negative values".into()]));
        }
        c.betas = b.clone();
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Landscape => Command::Landscape,
        Sub::Simulate => Command::Simulate,
        Sub::Solve => Command::Solve,
        Sub::Reduce => Command::Reduce,
        Sub::Verify => Command::Verify,
    };
    let outcome = resolve(&cli).and_then(|c| run(command, &c, cli.out.as_deref()));
    match outcome {
        Ok(o) => {
            if cli.out.is_none() {
                match o.report.to_canonical_json() {
                    Ok(text) => print!("{text}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(e.exit_code() as u8);
                    }
                }
            } else {
                for a in &o.artifacts {
                    eprintln!("wrote {}", a.display());
                }
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
