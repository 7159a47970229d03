mod commands;
mod config;

use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sensegraph::io::SummaryRow;
use sensegraph::synth::SynthParams;
use sensegraph::Error;

use config::{ExperimentArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "sensegraph", version, about = "Verb-sense disambiguation by replicator dynamics on a similarity graph")]
struct Cli {
    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Print debug output.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured grid and write results.csv and ablation.csv.
    Run(ExperimentArgs),
    /// Like `run`, with the grid defaulting to 1..=20 labels per class.
    Ablate(ExperimentArgs),
    /// Check every input file without running the dynamics.
    Validate(ExperimentArgs),
    /// Score the first-sense, most-frequent-sense and unsupervised baselines.
    Baselines(ExperimentArgs),
    /// Write a synthetic corpus and an experiment.toml for it.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = SynthParams::default().clusters)]
    clusters: usize,
    #[arg(long, default_value_t = SynthParams::default().points)]
    points: usize,
    #[arg(long, default_value_t = SynthParams::default().dim)]
    dim: usize,
    #[arg(long, default_value_t = SynthParams::default().noise)]
    noise: f64,
    #[arg(long, default_value_t = SynthParams::default().seed)]
    seed: u64,
    #[arg(short, long, default_value = "synthetic")]
    output_dir: PathBuf,
}

const DEFAULT_LPC: [usize; 3] = [1, 2, 20];

fn print_rows(rows: &[SummaryRow]) {
    println!("{:<12} {:<11} {:<13} accuracy (%)", "modality", "class", "baseline");
    for r in rows {
        println!("{:<12} {:<11} {:<13} {:.1}", r.modality, r.class, r.protocol, 100.0 * r.mean_acc);
    }
}

fn execute(command: Command) -> Result<bool, Error> {
    match command {
        Command::Run(args) => {
            let results = commands::run(&Settings::resolve(&args, &DEFAULT_LPC)?)?;
            print!("{}", commands::format_table(&results));
        }
        Command::Ablate(args) => {
            let lpc: Vec<usize> = (1..=20).collect();
            let results = commands::run(&Settings::resolve(&args, &lpc)?)?;
            print!("{}", commands::format_table(&results));
        }
        Command::Validate(args) => {
            let findings = commands::validate(&Settings::resolve(&args, &DEFAULT_LPC)?);
            for line in &findings.lines {
                println!("{line}");
            }
            println!("{} failures, {} warnings", findings.failures, findings.warnings);
            return Ok(findings.failures == 0);
        }
        Command::Baselines(args) => print_rows(&commands::baselines(&Settings::resolve(&args, &DEFAULT_LPC)?)?),
        Command::Synth(a) => {
            let params = SynthParams {
                clusters: a.clusters,
                points: a.points,
                dim: a.dim,
                noise: a.noise,
                seed: a.seed,
            };
            for path in commands::synth(&params, &a.output_dir)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else if cli.verbose {
        log::LevelFilter::Debug
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
