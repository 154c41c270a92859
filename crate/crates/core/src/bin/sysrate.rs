use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sysrate::cli::{cmd_emulate, cmd_min_rate, cmd_rdf_curve, cmd_sample, RunConfig, DEFAULT_DISTORTION};
use sysrate::emulation::SourceFamily;
use sysrate::{Result, TrajectoryDataset};

#[derive(Parser)]
#[command(name = "sysrate", version, about = "Code-rate complexity of linear stochastic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the rate-vs-sampling curve as CSV.
    RdfCurve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Accepted for uniformity; the curve is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the slowest sampling rate that fits the configured capacity.
    MinRate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a training dataset of exact-discretization sample paths.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Emulate a new trajectory from a dataset and a source family.
    Emulate {
        dataset: PathBuf,
        family: PathBuf,
        #[arg(long, default_value_t = 100)]
        resolution: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DISTORTION)]
        distortion: f64,
    },
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RdfCurve { config, out, .. } => {
            let res = cmd_rdf_curve(&RunConfig::read(config)?)?;
            write_or_print(out.as_deref(), &res.csv)?;
            if out.is_some() {
                println!("{}", res.report);
            } else {
                eprintln!("{}", res.report);
            }
        }
        Command::MinRate { config, out, .. } => {
            let line = cmd_min_rate(&RunConfig::read(config)?)?;
            if let Some(p) = out {
                std::fs::write(p, format!("{line}\n"))?;
            }
            println!("{line}");
        }
        Command::Sample { config, out, seed } => {
            let ds = cmd_sample(&RunConfig::read(config)?, seed)?;
            ds.write_csv(&out)?;
            println!("trials={} steps={} dim={}", ds.trials(), ds.steps(), ds.dim());
        }
        Command::Emulate { dataset, family, resolution, out, seed, distortion } => {
            let ds = TrajectoryDataset::read_csv(dataset)?;
            let fam = SourceFamily::read_json(family)?;
            let res = cmd_emulate(&ds, &fam, resolution, seed, distortion)?;
            res.trajectory.write_csv(&out)?;
            println!("{}", res.report.line());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
