//! Command-line driver: generate scenarios, run strategies, sweep
//! parameters, and validate outcomes.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use edgemarket::experiments::{
    metric_row, run_sweep, write_csv, Scale, SweepParam, SweepSpec,
};
use edgemarket::generator::{generate, load_scenario, save_scenario, CountSpec, GenConfig};
use edgemarket::pipeline::{run, Strategy};
use edgemarket::validate::validate;
use edgemarket::Scenario;

#[derive(Parser)]
#[command(
    name = "edgemarket",
    version,
    about = "Incentive-driven task allocation for device-assisted edge networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario and write it as JSON.
    Generate(GenerateArgs),
    /// Run one strategy on a scenario and print a summary.
    Run(RunArgs),
    /// Sweep one parameter over a list of values and write CSV metrics.
    Sweep(SweepArgs),
    /// Run a strategy and check the outcome against every constraint.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ScenarioSource {
    /// Load the scenario from this JSON file instead of generating one.
    #[arg(long, conflicts_with_all = ["seed", "cells", "scale", "gamma", "tds", "ads"])]
    scenario: Option<PathBuf>,
    /// Seed for scenario generation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of cells.
    #[arg(long, default_value_t = 5)]
    cells: usize,
    /// Size regime: desk or paper.
    #[arg(long, default_value_t = Scale::Desk)]
    scale: Scale,
    /// Energy-cost weight.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Exact task devices per cell (default: drawn per scale).
    #[arg(long)]
    tds: Option<usize>,
    /// Exact aux devices per cell (default: drawn per scale).
    #[arg(long)]
    ads: Option<usize>,
}

impl ScenarioSource {
    fn config(&self) -> GenConfig {
        let mut cfg = self.scale.base_config(self.seed);
        cfg.cells = self.cells;
        cfg.gamma = self.gamma;
        if let Some(n) = self.tds {
            cfg.td_count = CountSpec::Spread { mean: n as f64, step: 0.0 };
        }
        if let Some(k) = self.ads {
            cfg.ad_count = CountSpec::Spread { mean: k as f64, step: 0.0 };
        }
        cfg
    }

    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(path) => {
                load_scenario(path).with_context(|| format!("loading {}", path.display()))
            }
            None => Ok(generate(&self.config())?),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Strategy to run.
    #[arg(long, default_value_t = Strategy::Full)]
    strategy: Strategy,
    /// Optional CSV file for the run's metric row.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Parameter to vary: cells, td-count, ad-count, gamma, or td-spread.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values for the parameter.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Comma-separated seeds; each value is run once per seed.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Comma-separated strategies to run at every point.
    #[arg(long, value_delimiter = ',', default_value = "full")]
    strategies: Vec<Strategy>,
    /// Size regime: desk or paper.
    #[arg(long, default_value_t = Scale::Desk)]
    scale: Scale,
    /// Base energy-cost weight (ignored when sweeping gamma).
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Extra runs per point; level timings report the median.
    #[arg(long, default_value_t = 0)]
    timing_repeats: usize,
    /// Output CSV file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario JSON file to check.
    #[arg(long)]
    scenario: PathBuf,
    /// Strategy whose outcome is validated.
    #[arg(long, default_value_t = Strategy::Full)]
    strategy: Strategy,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => {
            if args.source.scenario.is_some() {
                bail!("generate builds a new scenario; --scenario makes no sense here");
            }
            let sc = generate(&args.source.config())?;
            save_scenario(&sc, &args.out)?;
            println!(
                "wrote {} ({} cells, {} task devices, {} aux devices, seed {})",
                args.out.display(),
                sc.cells(),
                sc.devices.len(),
                sc.aux_devices.len(),
                sc.seed
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let sc = args.source.load()?;
            let outcome = run(&sc, args.strategy)?;
            let row = metric_row("seed", sc.seed as f64, &sc, &outcome);
            println!("strategy            {}", row.strategy);
            println!("cells               {}", row.cells);
            println!("task devices        {}", row.devices);
            println!("aux devices         {}", row.aux_devices);
            println!("agreed offloads     {}", row.agreed);
            println!("final offloads      {}", row.offloaded);
            println!("level-2 moves       {}", row.moved);
            println!("auction trades      {}", row.auctioned);
            println!("provider utility    {:.4}", row.esp_utility);
            println!("system utility      {:.4}", row.system_utility);
            println!("utility gain        {:.4}", row.utility_gain);
            println!("offloading ratio    {:.4}", row.offloading_ratio);
            println!(
                "level seconds       {:.6} / {:.6} / {:.6}",
                row.level1_seconds, row.level2_seconds, row.level3_seconds
            );
            if let Some(path) = args.out {
                let file = std::fs::File::create(&path)
                    .with_context(|| format!("creating {}", path.display()))?;
                write_csv(std::slice::from_ref(&row), file)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let spec = SweepSpec {
                param: args.param,
                values: args.values,
                seeds: args.seeds,
                strategies: args.strategies,
                scale: args.scale,
                gamma: args.gamma,
                timing_repeats: args.timing_repeats,
            };
            let rows = run_sweep(&spec)?;
            match args.out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .with_context(|| format!("creating {}", path.display()))?;
                    write_csv(&rows, file)?;
                    eprintln!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(args) => {
            let sc = load_scenario(&args.scenario)
                .with_context(|| format!("loading {}", args.scenario.display()))?;
            let outcome = run(&sc, args.strategy)?;
            let violations = validate(&sc, &outcome.decisions);
            if violations.is_empty() {
                println!(
                    "ok: {} on {} satisfies all constraints ({} decisions)",
                    args.strategy,
                    args.scenario.display(),
                    outcome.decisions.len()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &violations {
                    println!("violation {v}");
                }
                println!("{} constraint violations", violations.len());
                Ok(ExitCode::from(2))
            }
        }
    }
}
