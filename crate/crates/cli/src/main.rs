use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use ncr_capacity::activation::StrategyKind;
use ncr_capacity::config::ExperimentConfig;
use ncr_capacity::harness::{self, ResultRow, SweepPoint};
use ncr_capacity::par::Schedule;

#[derive(Debug, Parser)]
#[command(name = "ncr-sim", version, about = "Repeater-assisted OFDM uplink capacity sweeps")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    drops: Option<usize>,
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Start from the full-scale protocol (25 drops, 10 realizations,
    /// 1000 subcarriers) instead of the desk-scale defaults.
    #[arg(long, global = true)]
    full_scale: bool,
    /// Evaluate on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity versus bandwidth at fixed subcarrier spacing.
    Fig1,
    /// Capacity versus amplification factor at fixed bandwidth.
    Fig2,
    /// One (drop, realization, strategy) evaluation.
    Single(SingleArgs),
    /// Print the effective configuration as TOML.
    Config,
}

#[derive(Debug, Args)]
struct SingleArgs {
    #[arg(long, default_value = "closest_one")]
    strategy: StrategyKind,
    /// Defaults to `activation.alpha_db` from the configuration.
    #[arg(long, allow_hyphen_values = true)]
    alpha_db: Option<f64>,
    #[arg(long, default_value_t = 15e6)]
    bandwidth_hz: f64,
    /// Defaults to bandwidth / subcarrier spacing.
    #[arg(long)]
    subcarriers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    drop: usize,
    #[arg(long, default_value_t = 0)]
    realization: usize,
}

fn load_config(common: &Common) -> ncr_capacity::Result<ExperimentConfig> {
    let mut cfg = match (&common.config, common.full_scale) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, true) => ExperimentConfig::full_scale(),
        (None, false) => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(d) = common.drops {
        cfg.drops = d;
    }
    if let Some(r) = common.realizations {
        cfg.realizations = r;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(rows: &[ResultRow]) {
    println!("{:<18} {:>14} {:>10} {:>16}", "strategy", "bandwidth_hz", "alpha_db", "mean_mbps");
    for s in harness::summarize(rows) {
        println!(
            "{:<18} {:>14} {:>10} {:>16.6}",
            s.strategy.as_str(),
            s.bandwidth_hz,
            s.alpha_db,
            s.mean_capacity_bps / 1e6
        );
    }
}

fn write_rows(cfg: &ExperimentConfig, rows: &[ResultRow]) -> ncr_capacity::Result<()> {
    match &cfg.output {
        Some(path) => {
            harness::emit_csv(rows, path)?;
            info!("wrote {} rows to {}", rows.len(), path.display());
            Ok(())
        }
        None => Ok(()),
    }
}

fn run(cli: Cli) -> ncr_capacity::Result<()> {
    let cfg = load_config(&cli.common)?;
    let schedule = if cli.common.sequential {
        Schedule::Sequential
    } else {
        Schedule::Parallel
    };
    let started = Instant::now();
    match cli.command {
        Command::Fig1 => {
            let rows = harness::run_fig1_sweep(&cfg, schedule)?;
            print_summary(&rows);
            write_rows(&cfg, &rows)?;
        }
        Command::Fig2 => {
            let rows = harness::run_fig2_sweep(&cfg, schedule)?;
            print_summary(&rows);
            write_rows(&cfg, &rows)?;
        }
        Command::Single(args) => {
            let alpha_db = args.alpha_db.unwrap_or(cfg.activation.alpha_db);
            let point = match args.subcarriers {
                Some(s) => SweepPoint {
                    bandwidth_hz: args.bandwidth_hz,
                    subcarriers: s,
                    alpha_db,
                },
                None => SweepPoint::from_spacing(args.bandwidth_hz, cfg.link.subcarrier_spacing_hz, alpha_db)?,
            };
            let row = harness::run_single(&cfg, args.drop, args.realization, args.strategy, point)?;
            println!(
                "{} drop={} realization={} bandwidth_hz={} subcarriers={} alpha_db={} capacity_bps={}",
                row.strategy, row.drop, row.realization, row.bandwidth_hz, point.subcarriers, row.alpha_db, row.capacity_bps
            );
            write_rows(&cfg, std::slice::from_ref(&row))?;
        }
        Command::Config => print!("{}", cfg.to_toml_string()),
    }
    info!("finished in {:.2?}", started.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
