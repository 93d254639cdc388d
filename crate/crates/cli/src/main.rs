//! `mcdisc`: synthesize, evaluate, optimize and simulate multi-channel
//! listening schedules, and run full experiment campaigns.
//!
//! Exit codes: 0 success, 2 invalid configuration or input, 3 size-cap
//! exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mcdisc_cli::campaign::{
    self, emit_plot_data, numeric_rows_csv, sim_rows_csv, summary_csv, CampaignConfig,
    CampaignError, CampaignMode,
};
use mcdisc_cli::probfile;
use mcdisc_core::families::{classify, uniform_probabilities};
use mcdisc_core::mdtopt::{build_ilp_capped, brute_force_oracle, solve_exact, MdtOptError,
    BUILD_HORIZON_CAP, SOLVE_HORIZON_CAP};
use mcdisc_core::metrics::compute_metrics;
use mcdisc_core::model::{BpSet, ConfigProbabilityMap, ListeningSchedule};
use mcdisc_core::schedulers::Strategy;
use mcdisc_core::sim::{generate_neighbors, run_trial, success_rate, PhyParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_CONFIG: u8 = 2;
const EXIT_TOO_LARGE: u8 = 3;

#[derive(Parser)]
#[command(name = "mcdisc", about = "Multi-channel neighbor-discovery schedule toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Scenario {
    /// Beacon periods, e.g. 1,2,4
    #[arg(long, value_delimiter = ',', required = true)]
    bp: Vec<u64>,
    /// Number of channels
    #[arg(long)]
    channels: u32,
    /// Configuration probability file (channel,period,offset,num,den);
    /// uniform if omitted
    #[arg(long)]
    probs: Option<PathBuf>,
}

#[derive(Args)]
struct PhyArgs {
    #[arg(long, default_value_t = 960)]
    slot_symbols: u64,
    #[arg(long, default_value_t = 38)]
    beacon_symbols: u64,
    #[arg(long, default_value_t = 24)]
    switch_symbols: u64,
    /// Do not apply the deaf period to the first scanned slot
    #[arg(long)]
    no_initial_deaf: bool,
}

impl PhyArgs {
    fn to_phy(&self) -> PhyParams {
        PhyParams {
            slot_symbols: self.slot_symbols,
            beacon_symbols: self.beacon_symbols,
            switch_symbols: self.switch_symbols,
            initial_deaf: !self.no_initial_deaf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct a schedule with one strategy and print it (slot,channel)
    Synth {
        #[command(flatten)]
        scenario: Scenario,
        /// greedy-rnd | greedy-dtr | greedy-rnd-swt | greedy-dtr-swt |
        /// chan-train | opt-b2 | psv
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the metric report of a schedule file
    Eval {
        #[command(flatten)]
        scenario: Scenario,
        /// Schedule file (slot,channel per line)
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Solve the exact MDT-optimal schedule (or emit the model as LP text)
    Mdtopt {
        #[command(flatten)]
        scenario: Scenario,
        /// Write the integer program in LP format and exit
        #[arg(long)]
        emit_lp: Option<PathBuf>,
        /// Cross-check against the exhaustive oracle
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run realistic trials of one strategy and print success-rate CSV
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 15)]
        neighbors: u32,
        #[arg(long, default_value_t = 5)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        phy: PhyArgs,
    },
    /// Run an experiment campaign from a key=value config file
    Campaign {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for CSV files
        #[arg(long)]
        out: PathBuf,
        /// Override the config's master_seed
        #[arg(long)]
        seed: Option<u64>,
        /// Scale sample and run counts
        #[arg(long)]
        scale: Option<f64>,
        /// Plot metrics to emit (mdt,wdt,slots,switches,success,ndot)
        #[arg(long, value_delimiter = ',')]
        plots: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct AppError {
    code: u8,
    message: String,
}

impl AppError {
    fn config(msg: impl ToString) -> Self {
        AppError {
            code: EXIT_CONFIG,
            message: msg.to_string(),
        }
    }

    fn too_large(msg: impl ToString) -> Self {
        AppError {
            code: EXIT_TOO_LARGE,
            message: msg.to_string(),
        }
    }
}

impl From<CampaignError> for AppError {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::TooLarge(_) => AppError::too_large(e),
            _ => AppError::config(e),
        }
    }
}

impl From<MdtOptError> for AppError {
    fn from(e: MdtOptError) -> Self {
        match e {
            MdtOptError::TooLarge(_) => AppError::too_large(e),
            _ => AppError::config(e),
        }
    }
}

fn load_scenario(s: &Scenario) -> Result<(BpSet, u32, ConfigProbabilityMap), AppError> {
    let bp = BpSet::new(&s.bp).map_err(AppError::config)?;
    let probs = match &s.probs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| AppError::config(format!("{}: {}", path.display(), e)))?;
            probfile::parse(&text, &bp, s.channels).map_err(AppError::config)?
        }
        None => uniform_probabilities(&bp, s.channels).map_err(AppError::config)?,
    };
    Ok((bp, s.channels, probs))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::config(format!("{}: {}", path.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Synth {
            scenario,
            strategy,
            seed,
            out,
        } => {
            let (bp, channels, probs) = load_scenario(&scenario)?;
            let strategy = Strategy::parse(&strategy)
                .ok_or_else(|| AppError::config(format!("unknown strategy '{}'", strategy)))?;
            let schedule = strategy
                .synthesize(&bp, channels, &probs, seed)
                .map_err(AppError::config)?;
            write_or_print(&out, &schedule.to_file_string())
        }
        Command::Eval { scenario, schedule } => {
            let (bp, channels, probs) = load_scenario(&scenario)?;
            let text = std::fs::read_to_string(&schedule)
                .map_err(|e| AppError::config(format!("{}: {}", schedule.display(), e)))?;
            let schedule = ListeningSchedule::from_file_string(&text).map_err(AppError::config)?;
            let m = compute_metrics(&schedule, &bp, channels, &probs).map_err(AppError::config)?;
            println!("family: {}", classify(&bp));
            println!("wdt_slots: {}", m.wdt_slots);
            println!("mdt: {}/{} ({})", m.mdt.numer(), m.mdt.denom(), m.mdt_f64());
            println!("listening_slots: {}", m.listening_slots);
            println!("channel_switches: {}", m.channel_switches);
            println!("normalized_wdt: {}", m.normalized_wdt);
            println!("normalized_switches: {}", m.normalized_switches);
            println!("ndot_cdf:");
            for (x, y) in &m.ndot_cdf {
                println!("  {},{}", x, y);
            }
            Ok(())
        }
        Command::Mdtopt {
            scenario,
            emit_lp,
            oracle,
            out,
        } => {
            let (bp, channels, probs) = load_scenario(&scenario)?;
            if let Some(path) = emit_lp {
                let model = build_ilp_capped(&bp, channels, &probs, BUILD_HORIZON_CAP)?;
                return write_or_print(&Some(path), &model.to_lp_string());
            }
            let model = build_ilp_capped(&bp, channels, &probs, SOLVE_HORIZON_CAP)?;
            let (schedule, mdt) = solve_exact(&model)?;
            if oracle {
                let (_, oracle_mdt) = brute_force_oracle(&bp, channels, &probs, model.horizon())?;
                if oracle_mdt != mdt {
                    return Err(AppError::config(format!(
                        "solver/oracle disagreement: {} vs {}",
                        mdt, oracle_mdt
                    )));
                }
                println!("# oracle agrees: mdt = {}/{}", mdt.numer(), mdt.denom());
            }
            println!("# optimal mdt = {}/{} ({})", mdt.numer(), mdt.denom(),
                *mdt.numer() as f64 / *mdt.denom() as f64);
            write_or_print(&out, &schedule.to_file_string())
        }
        Command::Simulate {
            scenario,
            strategy,
            neighbors,
            trials,
            seed,
            phy,
        } => {
            let (bp, channels, probs) = load_scenario(&scenario)?;
            let strategy = Strategy::parse(&strategy)
                .ok_or_else(|| AppError::config(format!("unknown strategy '{}'", strategy)))?;
            let phy = phy.to_phy();
            phy.validate().map_err(AppError::config)?;
            let schedule = strategy
                .synthesize(&bp, channels, &probs, seed)
                .map_err(AppError::config)?;
            let family = classify(&bp);
            let mut outcomes = Vec::new();
            println!("family,strategy,seed,num_channels,num_neighbors,discovered,total,success_rate");
            for trial in 0..trials {
                let trial_seed = seed.wrapping_add(trial as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
                let population =
                    generate_neighbors(&bp, channels, neighbors as usize, &phy, &mut rng)
                        .map_err(AppError::config)?;
                let outcome = run_trial(&schedule, &bp, channels, &population, &phy)
                    .map_err(AppError::config)?;
                println!(
                    "{},{},{},{},{},{},{},{}",
                    family,
                    strategy,
                    trial_seed,
                    channels,
                    neighbors,
                    outcome.discovered_count(),
                    outcome.total(),
                    outcome.rate()
                );
                outcomes.push(outcome);
            }
            if let Ok(s) = success_rate(&outcomes) {
                println!("# mean={} ci=[{},{}]", s.mean, s.ci_low, s.ci_high);
            }
            Ok(())
        }
        Command::Campaign {
            config,
            out,
            seed,
            scale,
            plots,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| AppError::config(format!("{}: {}", config.display(), e)))?;
            let mut cfg = CampaignConfig::parse(&text)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(scale) = scale {
                cfg.apply_scale(scale)?;
            }
            let report = campaign::run_campaign(&cfg)?;
            std::fs::create_dir_all(&out)
                .map_err(|e| AppError::config(format!("{}: {}", out.display(), e)))?;
            let write = |name: &str, text: String| -> Result<(), AppError> {
                let path = out.join(name);
                std::fs::write(&path, text)
                    .map_err(|e| AppError::config(format!("{}: {}", path.display(), e)))
            };
            match report.mode {
                CampaignMode::Numeric => write("numeric_rows.csv", numeric_rows_csv(&report))?,
                CampaignMode::Simulation => write("sim_rows.csv", sim_rows_csv(&report))?,
            }
            write("summary.csv", summary_csv(&report))?;
            if !plots.is_empty() {
                let metrics: Vec<&str> = plots.iter().map(String::as_str).collect();
                emit_plot_data(&report, &metrics, &out)?;
            }
            Ok(())
        }
    }
}
