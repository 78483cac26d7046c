//! `bohm`: run a wavepacket scenario and write its CSV/report artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use bohm_core::config::{parse_config, Assignment};
use bohm_core::{run, Error, RunConfig, Scenario};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bohm",
    version,
    about = "1D wavepacket propagation with Bohmian trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario and write fields.csv, trajectories.csv and report.txt.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,

    #[arg(long, value_enum)]
    preset: Option<Preset>,

    /// Extra `key=value` assignments applied after the config or preset.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Free,
    Eckart,
}

fn build_config(args: &RunArgs) -> Result<RunConfig, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut assignments = parse_config(&text)?;
    for (n, o) in args.overrides.iter().enumerate() {
        assignments.push(Assignment::parse_pair(o, format!("--override {}", n + 1))?);
    }
    let scenario = match args.preset {
        Some(Preset::Free) => Scenario::Free,
        Some(Preset::Eckart) => Scenario::Eckart,
        None => Scenario::Custom,
    };
    let mut config = RunConfig::from_assignments(scenario, assignments)?;
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Command::Run(args) = Cli::parse().command;
    let result = build_config(&args).and_then(|config| run(&config));
    match result {
        Ok(summary) => {
            let r = &summary.report;
            println!("transmission = {}", r.transmission);
            println!("reflection = {}", r.reflection);
            match r.onset_time {
                Some(t) => println!("onset_time = {t}"),
                None => println!("onset_time = none"),
            }
            println!("results in {}", summary.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
