//! Command implementations behind the binary: reproducible runs wired from
//! datasets, strategies, agents, and reports.
//!
//! Every run artifact embeds its full resolved [`RunConfig`]; artifact file
//! names are content-addressed by the SHA-256 of that config, so re-running
//! an identical configuration overwrites the identical file and comparison
//! runs can reuse cached artifacts byte-for-byte.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::backend::{BackendConfig, BackendError, ChatBackend, HttpBackend};
use crate::agents::mock::MockBackend;
use crate::agents::{AblationConfig, AgentOptions, AgentStrategy};
use crate::dataio::{
    default_splits, find_split, load_split_config, Asset, DataError, Dataset, SplitName, SplitSpec,
};
use crate::engine::{run_backtest, EngineError, FeeModel, RunResult, Strategy};
use crate::metrics::{render_table, summarize, MetricsSummary, TableFormat};
use crate::strategies::{
    default_grid, tune, StrategyError, StrategySpec, TuneMetric, TuneReport, TunedParamsCache,
};
use crate::synth::{write_sample_data, AssetFiles};

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("strategy failed: {0}")]
    Run(String),
}

impl CliError {
    /// 1 for strategy/backend failures, 2 for configuration/data failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Metrics(_) => 2,
            CliError::Strategy(e) => match e {
                StrategyError::Data(_) => 2,
                _ => 1,
            },
            CliError::Backend(_) => 1,
            CliError::Run(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) | CliError::Io { .. } => "data",
            CliError::Metrics(_) => "metrics",
            CliError::Strategy(_) => "strategy",
            CliError::Backend(_) => "backend",
            CliError::Run(_) => "run",
        }
    }

    /// Single-line machine-readable rendering for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({
            "error": {
                "code": self.exit_code(),
                "kind": self.kind(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

fn engine_err(e: EngineError) -> CliError {
    match e {
        EngineError::Data(d) => CliError::Data(d),
        EngineError::Strategy { date, source } => CliError::Run(format!("on {date}: {source}")),
        other => CliError::Config(other.to_string()),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Run configuration and artifacts
// ---------------------------------------------------------------------------

/// How the daily decisions are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StrategyChoice {
    Classical { spec: StrategySpec },
    Agent { ablation: AblationConfig },
}

impl fmt::Display for StrategyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyChoice::Classical { spec } => write!(f, "{spec}"),
            StrategyChoice::Agent { ablation } => write!(f, "agent({ablation})"),
        }
    }
}

/// The full resolved configuration of one run; embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub asset: Asset,
    pub split: SplitName,
    pub strategy: StrategyChoice,
    pub fee_rate: f64,
    pub capital: f64,
    pub market_data: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub txn_stats_data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub news_data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_config: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_fixture: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Hex SHA-256 of the canonical JSON form of a config; the artifact address.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    use sha2::{Digest, Sha256};
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn short_hash<T: Serialize>(config: &T) -> String {
    config_hash(config)[..16].to_string()
}

/// A completed run: resolved config, audit trail, and metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub config: RunConfig,
    pub strategy_id: String,
    pub result: RunResult,
    pub summary: MetricsSummary,
}

impl RunArtifact {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("artifact serializes");
        text.push('\n');
        text
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let artifact: RunArtifact = serde_json::from_str(&text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if artifact.schema_version != ARTIFACT_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "artifact {} has schema version {}, expected {}",
                path.display(),
                artifact.schema_version,
                ARTIFACT_SCHEMA_VERSION
            )));
        }
        Ok(artifact)
    }
}

pub fn run_artifact_path(out_dir: &Path, config: &RunConfig) -> PathBuf {
    out_dir.join(format!("run-{}.json", short_hash(config)))
}

pub fn audit_log_path(out_dir: &Path, config: &RunConfig) -> PathBuf {
    out_dir.join(format!("audit-{}.jsonl", short_hash(config)))
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn resolve_split(config: &RunConfig) -> Result<SplitSpec, CliError> {
    let table = match &config.splits_file {
        Some(path) => load_split_config(path)?,
        None => default_splits(),
    };
    find_split(&table, &config.asset, &config.split).ok_or_else(|| {
        CliError::Config(format!(
            "no split named `{}` for asset {} in the split table",
            config.split, config.asset
        ))
    })
}

fn load_dataset(config: &RunConfig) -> Result<Dataset, CliError> {
    Ok(Dataset::load(
        &config.market_data,
        config.txn_stats_data.as_deref(),
        config.news_data.as_deref(),
    )?)
}

fn build_backend(config: &RunConfig) -> Result<Arc<dyn ChatBackend>, CliError> {
    match (&config.mock_fixture, &config.backend_config) {
        (Some(path), _) => Ok(Arc::new(MockBackend::load(path)?)),
        (None, Some(path)) => Ok(Arc::new(HttpBackend::new(BackendConfig::load(path)?)?)),
        (None, None) => Err(CliError::Config(
            "agent runs need either a mock fixture or a backend config".into(),
        )),
    }
}

/// Parse a compact strategy argument: `kind` or `kind:k=v,k=v`, e.g.
/// `sma:window=10` or `slma:short=5,long=20`.
pub fn parse_strategy_arg(arg: &str) -> Result<StrategySpec, CliError> {
    let (kind, params_text) = match arg.split_once(':') {
        Some((k, p)) => (k.trim(), p),
        None => (arg.trim(), ""),
    };
    let mut params = BTreeMap::new();
    for pair in params_text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            CliError::Config(format!("bad strategy parameter `{pair}` (expected k=v)"))
        })?;
        params.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(StrategySpec::from_parts(kind, &params)?)
}

fn execute_run(config: &RunConfig) -> Result<(RunArtifact, Option<String>), CliError> {
    let split = resolve_split(config)?;
    let dataset = load_dataset(config)?;
    let fee = FeeModel::new(config.fee_rate).map_err(|e| CliError::Config(e.to_string()))?;

    match &config.strategy {
        StrategyChoice::Classical { spec } => {
            let mut strategy = spec.build()?;
            let result = run_backtest(&dataset, &split, strategy.as_mut(), fee, config.capital)
                .map_err(engine_err)?;
            let summary = summarize(&result)?;
            Ok((
                RunArtifact {
                    schema_version: ARTIFACT_SCHEMA_VERSION,
                    config: config.clone(),
                    strategy_id: strategy.id(),
                    result,
                    summary,
                },
                None,
            ))
        }
        StrategyChoice::Agent { ablation } => {
            let backend = build_backend(config)?;
            let mut agent = AgentStrategy::new(
                config.asset.clone(),
                *ablation,
                backend,
                AgentOptions::default(),
            );
            let outcome = run_backtest(&dataset, &split, &mut agent, fee, config.capital);
            let audit = agent.audit_log_jsonl();
            match outcome {
                Ok(result) => {
                    let summary = summarize(&result)?;
                    Ok((
                        RunArtifact {
                            schema_version: ARTIFACT_SCHEMA_VERSION,
                            config: config.clone(),
                            strategy_id: agent.id(),
                            result,
                            summary,
                        },
                        Some(audit),
                    ))
                }
                Err(e) => {
                    // Preserve the partial audit log before surfacing the failure.
                    let audit_path = audit_log_path(&config.out_dir, config);
                    std::fs::create_dir_all(&config.out_dir).ok();
                    std::fs::write(&audit_path, audit).map_err(io_err(&audit_path))?;
                    Err(engine_err(e))
                }
            }
        }
    }
}

fn write_artifact(config: &RunConfig, artifact: &RunArtifact) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let path = run_artifact_path(&config.out_dir, config);
    std::fs::write(&path, artifact.to_json()).map_err(io_err(&path))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Outcome of a backtest or agent-run command.
#[derive(Debug)]
pub struct RunOutput {
    pub artifact: RunArtifact,
    pub artifact_path: PathBuf,
    pub audit_path: Option<PathBuf>,
}

/// Run one classical backtest and persist its artifact.
pub fn cmd_backtest(config: &RunConfig) -> Result<RunOutput, CliError> {
    let (artifact, _) = execute_run(config)?;
    let artifact_path = write_artifact(config, &artifact)?;
    Ok(RunOutput {
        artifact,
        artifact_path,
        audit_path: None,
    })
}

/// Run the agent pipeline and persist both the artifact and the audit log.
pub fn cmd_agent_run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let (artifact, audit) = execute_run(config)?;
    let artifact_path = write_artifact(config, &artifact)?;
    let audit_path = audit_log_path(&config.out_dir, config);
    std::fs::write(&audit_path, audit.unwrap_or_default()).map_err(io_err(&audit_path))?;
    Ok(RunOutput {
        artifact,
        artifact_path,
        audit_path: Some(audit_path),
    })
}

/// Tuning command configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub asset: Asset,
    pub split: SplitName,
    pub kind: String,
    pub metric: TuneMetric,
    pub fee_rate: f64,
    pub capital: f64,
    pub market_data: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splits_file: Option<PathBuf>,
    pub out_dir: PathBuf,
}

/// Tune artifact: resolved config plus the full report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneArtifact {
    pub schema_version: u32,
    pub config: TuneConfig,
    pub report: TuneReport,
}

#[derive(Debug)]
pub struct TuneOutput {
    pub artifact: TuneArtifact,
    pub artifact_path: PathBuf,
    pub cache_path: PathBuf,
}

pub const TUNED_PARAMS_FILE: &str = "tuned_params.json";

/// Grid-tune one strategy kind on the validation split, persist the report,
/// and record the chosen spec in the tuned-parameter cache.
pub fn cmd_tune(config: &TuneConfig) -> Result<TuneOutput, CliError> {
    let table = match &config.splits_file {
        Some(path) => load_split_config(path)?,
        None => default_splits(),
    };
    let split = find_split(&table, &config.asset, &config.split).ok_or_else(|| {
        CliError::Config(format!(
            "no split named `{}` for asset {} in the split table",
            config.split, config.asset
        ))
    })?;
    let dataset = Dataset::load(&config.market_data, None, None)?;
    let fee = FeeModel::new(config.fee_rate).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = default_grid(&config.kind)?;
    let report = tune(&dataset, &split, &grid, fee, config.capital, config.metric)?;

    std::fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let artifact = TuneArtifact {
        schema_version: ARTIFACT_SCHEMA_VERSION,
        config: config.clone(),
        report,
    };
    let artifact_path = config
        .out_dir
        .join(format!("tune-{}.json", short_hash(&artifact.config)));
    let mut text = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
    text.push('\n');
    std::fs::write(&artifact_path, text).map_err(io_err(&artifact_path))?;

    let cache_path = config.out_dir.join(TUNED_PARAMS_FILE);
    let mut cache = if cache_path.exists() {
        TunedParamsCache::load(&cache_path)?
    } else {
        TunedParamsCache::default()
    };
    cache.store(&config.asset, &config.kind, artifact.report.chosen.clone());
    cache.save(&cache_path)?;

    Ok(TuneOutput {
        artifact,
        artifact_path,
        cache_path,
    })
}

/// Run (or reuse cached artifacts for) each strategy and render one
/// comparison table per requested split.
pub fn cmd_compare(
    base: &RunConfig,
    strategies: &[StrategySpec],
    splits: &[SplitName],
    format: TableFormat,
) -> Result<String, CliError> {
    let mut out = String::new();
    for split_name in splits {
        let mut rows: Vec<(String, MetricsSummary)> = Vec::new();
        for spec in strategies {
            let config = RunConfig {
                split: split_name.clone(),
                strategy: StrategyChoice::Classical { spec: spec.clone() },
                ..base.clone()
            };
            let path = run_artifact_path(&config.out_dir, &config);
            let artifact = if path.exists() {
                RunArtifact::load(&path)?
            } else {
                cmd_backtest(&config)?.artifact
            };
            rows.push((artifact.strategy_id.clone(), artifact.summary));
        }
        match format {
            TableFormat::Md => {
                out.push_str(&format!("## {} {}\n\n", base.asset, split_name));
            }
            TableFormat::Csv => {
                out.push_str(&format!("# {} {}\n", base.asset, split_name));
            }
        }
        out.push_str(&render_table(&rows, format));
        out.push('\n');
    }
    Ok(out)
}

/// Write the synthetic sample data set (market, txn-stats, news, splits).
pub fn cmd_synth_data(dir: &Path, assets: &[Asset]) -> Result<Vec<AssetFiles>, CliError> {
    write_sample_data(dir, assets).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        reason: e.to_string(),
    })
}
