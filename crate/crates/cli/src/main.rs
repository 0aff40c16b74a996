use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use swlab_cli::checks::run_checks;
use swlab_cli::config::RunConfig;
use swlab_cli::scenarios::{run_scenario, run_study, RunReport};
use swlab_cli::CliError;

#[derive(Parser)]
#[command(name = "swlab", version, about = "Rotating shallow-water laboratory")]
struct Cli {
    /// Output directory (overrides `output` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in a config file.
    Run { config: PathBuf },
    /// Friedrichs convergence study over a list of indices.
    Study {
        #[arg(long = "n", value_delimiter = ',', default_value = "4,8,16,32")]
        n_list: Vec<u32>,
        config: PathBuf,
    },
    /// Run the built-in property suite.
    Check,
}

fn load(path: &PathBuf, cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn report(r: &RunReport) -> i32 {
    for a in &r.assertions {
        println!("{} {} value={:e} bound={:e}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.value, a.bound);
    }
    if let Some(b) = &r.blow_up {
        eprintln!("blow-up at t = {}: {}", b.time, b.reason);
    }
    println!("{}: {} ({})", r.scenario, r.status(), r.dir.display());
    r.exit_code()
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Run { config } => Ok(report(&run_scenario(&load(config, cli)?)?)),
        Command::Study { n_list, config } => Ok(report(&run_study(&load(config, cli)?, n_list)?)),
        Command::Check => {
            let results = run_checks();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
