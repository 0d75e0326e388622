use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sapsr_sim::{
    run_simulation, run_suite, save_metrics, save_ppto_log, PolicyKind, SimConfig, SuiteName,
};

#[derive(Parser)]
#[command(
    name = "sapsr",
    version,
    about = "SAPSR epidemic simulator with test-allocation policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its daily CSV.
    Simulate {
        /// TOML config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        policy: Option<PolicyKind>,
        #[arg(long)]
        days: Option<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a named experiment over several seeds.
    Suite {
        #[arg(long)]
        name: SuiteName,
        #[arg(long, default_value_t = 20)]
        seeds: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(config: Option<&PathBuf>) -> Result<SimConfig> {
    match config {
        Some(path) => Ok(SimConfig::load(path)?),
        None => Ok(SimConfig::default()),
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            config,
            seed,
            policy,
            days,
            out,
        } => {
            let mut cfg = load(config.as_ref())?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.policy = policy.unwrap_or(cfg.policy);
            cfg.days = days.unwrap_or(cfg.days);
            cfg.validate()?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let outcome = run_simulation(cfg.clone())?;
            let stem = format!("{}_seed{:04}", cfg.policy, cfg.seed);
            let csv = out.join(format!("{stem}.csv"));
            save_metrics(&csv, &outcome.metrics)?;
            if !outcome.ppto_log.is_empty() {
                save_ppto_log(&out.join(format!("{stem}.log")), &outcome.ppto_log)?;
            }
            let last = outcome.metrics.last().expect("at least one day");
            println!(
                "{}: day {} S={} A={} P={} Y={} R={} cumulative infections {}",
                csv.display(),
                last.day,
                last.s,
                last.a,
                last.p,
                last.y,
                last.r,
                last.cum_infections
            );
        }
        Command::Suite {
            name,
            seeds,
            config,
            out,
        } => {
            let base = load(config.as_ref())?;
            let dir = out.join(name.name());
            let report = run_suite(name, &base, seeds, Some(&dir))?;
            print!("{}", report.summary_csv());
            println!("wrote {} runs to {}", report.runs.len(), dir.display());
        }
    }
    Ok(())
}
