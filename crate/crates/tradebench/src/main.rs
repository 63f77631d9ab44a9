use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tradebench::cli::{self, parse_strategy_arg, CliError, RunConfig, StrategyChoice, TuneConfig};
use tradebench::dataio::{Asset, SplitName};
use tradebench::engine::DEFAULT_FEE_RATE;
use tradebench::metrics::TableFormat;
use tradebench::strategies::TuneMetric;

/// Deterministic daily crypto backtesting: classical baselines, grid tuning,
/// and an LLM agent pipeline with ablatable prompts.
#[derive(Parser)]
#[command(name = "tradebench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Market CSV (date,open,high,low,close,volume,market_cap)
    #[arg(long)]
    market: Option<PathBuf>,
    /// Optional txn-stats CSV
    #[arg(long)]
    txn_stats: Option<PathBuf>,
    /// Optional news JSONL
    #[arg(long)]
    news: Option<PathBuf>,
    /// Optional split table CSV (asset,name,start,end); defaults are built in
    #[arg(long)]
    splits: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Asset ticker (BTC, ETH, SOL, ...)
    #[arg(long, default_value = "")]
    asset: String,
    /// Split name (validation, bearish, sideways, bullish, or custom)
    #[arg(long, default_value = "")]
    split: String,
    /// Proportional fee rate on traded notional
    #[arg(long, default_value_t = DEFAULT_FEE_RATE)]
    fee: f64,
    /// Starting capital in USD (split 50/50 between cash and the asset)
    #[arg(long, default_value_t = 1_000_000.0)]
    capital: f64,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed recorded in artifacts (classical paths are seed-free)
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one classical strategy over a split and write the run artifact.
    Backtest {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Strategy, e.g. `buy_and_hold`, `sma:window=10`, `slma:short=5,long=20`
        #[arg(long, default_value = "buy_and_hold")]
        strategy: String,
        /// Re-run from the config embedded in an existing artifact
        #[arg(long, conflicts_with_all = ["strategy"])]
        from_artifact: Option<PathBuf>,
    },
    /// Grid-tune a strategy kind on a validation split.
    Tune {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Strategy kind to tune (sma, slma, macd, bollinger, ...)
        #[arg(long)]
        kind: String,
        /// Selection metric: total_return or sharpe
        #[arg(long, default_value = "total_return")]
        metric: String,
    },
    /// Run several strategies and render a comparison table per split.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Strategy to include (repeatable)
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        /// Table format: md or csv
        #[arg(long, default_value = "md")]
        format: String,
    },
    /// Run the LLM agent pipeline under an ablation config.
    AgentRun {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Prompt ablation: full, no_reflection, no_news, no_txnstats,
        /// no_technical, or base
        #[arg(long, default_value = "full")]
        ablation: String,
        /// Backend config TOML (endpoint, model, ...)
        #[arg(long)]
        backend: Option<PathBuf>,
        /// Deterministic mock fixture JSONL instead of a live backend
        #[arg(long)]
        mock_fixture: Option<PathBuf>,
    },
    /// Write the bundled synthetic sample data set.
    SynthData {
        /// Output directory
        #[arg(long, default_value = "data")]
        out: PathBuf,
        /// Assets to generate (repeatable; default BTC, ETH, SOL)
        #[arg(long = "asset")]
        assets: Vec<String>,
    },
}

fn parse_asset(s: &str) -> Result<Asset, CliError> {
    s.parse()
        .map_err(|e: tradebench::dataio::DataError| CliError::Config(e.to_string()))
}

fn parse_split_name(s: &str) -> Result<SplitName, CliError> {
    s.parse()
        .map_err(|e: tradebench::dataio::DataError| CliError::Config(e.to_string()))
}

fn require_market(data: &DataArgs) -> Result<PathBuf, CliError> {
    data.market
        .clone()
        .ok_or_else(|| CliError::Config("--market <path> is required".into()))
}

fn build_run_config(
    data: &DataArgs,
    run: &RunArgs,
    strategy: StrategyChoice,
    backend_config: Option<PathBuf>,
    mock_fixture: Option<PathBuf>,
) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        asset: parse_asset(&run.asset)?,
        split: parse_split_name(&run.split)?,
        strategy,
        fee_rate: run.fee,
        capital: run.capital,
        market_data: require_market(data)?,
        txn_stats_data: data.txn_stats.clone(),
        news_data: data.news.clone(),
        splits_file: data.splits.clone(),
        backend_config,
        mock_fixture,
        out_dir: run.out.clone(),
        seed: run.seed,
    })
}

fn print_summary(output: &cli::RunOutput) {
    let s = &output.artifact.summary;
    println!(
        "{} {} {} | total_return {:.2}% | daily {:.2}±{:.2}% | sharpe {:.2}",
        output.artifact.config.asset,
        output.artifact.config.split,
        output.artifact.strategy_id,
        s.total_return_pct,
        s.daily_return_mean_pct,
        s.daily_return_std_pct,
        s.sharpe
    );
    println!("artifact: {}", output.artifact_path.display());
    if let Some(audit) = &output.audit_path {
        println!("audit log: {}", audit.display());
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Backtest {
            data,
            run,
            strategy,
            from_artifact,
        } => {
            let config = match from_artifact {
                Some(path) => cli::RunArtifact::load(&path)?.config,
                None => {
                    let spec = parse_strategy_arg(&strategy)?;
                    build_run_config(&data, &run, StrategyChoice::Classical { spec }, None, None)?
                }
            };
            let output = match config.strategy {
                StrategyChoice::Classical { .. } => cli::cmd_backtest(&config)?,
                StrategyChoice::Agent { .. } => cli::cmd_agent_run(&config)?,
            };
            print_summary(&output);
        }
        Command::Tune {
            data,
            run,
            kind,
            metric,
        } => {
            let config = TuneConfig {
                asset: parse_asset(&run.asset)?,
                split: parse_split_name(&run.split)?,
                kind,
                metric: metric.parse::<TuneMetric>().map_err(CliError::Config)?,
                fee_rate: run.fee,
                capital: run.capital,
                market_data: require_market(&data)?,
                splits_file: data.splits.clone(),
                out_dir: run.out.clone(),
            };
            let output = cli::cmd_tune(&config)?;
            println!(
                "chosen: {} (metric {:?}, {} specs evaluated)",
                output.artifact.report.chosen,
                output.artifact.config.metric,
                output.artifact.report.scores.len()
            );
            println!("report: {}", output.artifact_path.display());
            println!("params cache: {}", output.cache_path.display());
        }
        Command::Compare {
            data,
            run,
            strategies,
            format,
        } => {
            let specs = strategies
                .iter()
                .map(|s| parse_strategy_arg(s))
                .collect::<Result<Vec<_>, _>>()?;
            let format = format.parse::<TableFormat>().map_err(CliError::Config)?;
            let base = build_run_config(
                &data,
                &run,
                StrategyChoice::Classical {
                    spec: tradebench::strategies::StrategySpec::BuyAndHold,
                },
                None,
                None,
            )?;
            let splits = vec![parse_split_name(&run.split)?];
            let table = cli::cmd_compare(&base, &specs, &splits, format)?;
            print!("{table}");
        }
        Command::AgentRun {
            data,
            run,
            ablation,
            backend,
            mock_fixture,
        } => {
            let ablation = ablation
                .parse::<tradebench::agents::AblationConfig>()
                .map_err(CliError::Config)?;
            let config = build_run_config(
                &data,
                &run,
                StrategyChoice::Agent { ablation },
                backend,
                mock_fixture,
            )?;
            let output = cli::cmd_agent_run(&config)?;
            print_summary(&output);
        }
        Command::SynthData { out, assets } => {
            let assets = if assets.is_empty() {
                vec![Asset::Btc, Asset::Eth, Asset::Sol]
            } else {
                assets
                    .iter()
                    .map(|s| parse_asset(s))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let files = cli::cmd_synth_data(&out, &assets)?;
            for f in files {
                println!("wrote {}", f.market.display());
                println!("wrote {}", f.txn_stats.display());
                println!("wrote {}", f.news.display());
            }
            println!("wrote {}", out.join("splits.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
