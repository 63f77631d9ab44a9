//! The four-analyst daily pipeline: market report, news digest, reflection,
//! and the trading decision, assembled into an ablatable prompt against a
//! pluggable chat backend.
//!
//! Per day the pipeline runs market report (technical flag), news report
//! (news flag), reflection over the trailing week (reflection flag, skipped
//! while there is no history), assembles the prompt bundle, queries the
//! backend, and parses the action. Analyst reports only ever see data dated
//! strictly before the decision day; the base section additionally shows
//! today's open. Malformed trading responses are retried with an appended
//! instruction and fall back to hold.

pub mod backend;
pub mod mock;
pub mod parse;
pub mod prompts;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dataio::Asset;
use crate::engine::{DecisionContext, Strategy, TradeAction};
use crate::strategies::StrategyError;

use backend::{ChatBackend, ChatRequest, ModelExchange, RequestKind};
use parse::parse_action;

/// Which optional prompt sections are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationFlags {
    pub technical: bool,
    pub news: bool,
    pub txn_stats: bool,
    pub reflection: bool,
}

impl AblationFlags {
    pub const ALL: AblationFlags = AblationFlags {
        technical: true,
        news: true,
        txn_stats: true,
        reflection: true,
    };
    pub const NONE: AblationFlags = AblationFlags {
        technical: false,
        news: false,
        txn_stats: false,
        reflection: false,
    };
}

/// Named prompt configurations: the full prompt, each leave-one-out variant,
/// and the bare base prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationConfig {
    Full,
    NoReflection,
    NoNews,
    NoTxnstats,
    NoTechnical,
    Base,
}

impl AblationConfig {
    pub const ALL: [AblationConfig; 6] = [
        AblationConfig::Full,
        AblationConfig::NoReflection,
        AblationConfig::NoNews,
        AblationConfig::NoTxnstats,
        AblationConfig::NoTechnical,
        AblationConfig::Base,
    ];

    pub fn flags(&self) -> AblationFlags {
        let mut flags = AblationFlags::ALL;
        match self {
            AblationConfig::Full => {}
            AblationConfig::NoReflection => flags.reflection = false,
            AblationConfig::NoNews => flags.news = false,
            AblationConfig::NoTxnstats => flags.txn_stats = false,
            AblationConfig::NoTechnical => flags.technical = false,
            AblationConfig::Base => flags = AblationFlags::NONE,
        }
        flags
    }
}

impl fmt::Display for AblationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AblationConfig::Full => "full",
            AblationConfig::NoReflection => "no_reflection",
            AblationConfig::NoNews => "no_news",
            AblationConfig::NoTxnstats => "no_txnstats",
            AblationConfig::NoTechnical => "no_technical",
            AblationConfig::Base => "base",
        };
        write!(f, "{name}")
    }
}

impl FromStr for AblationConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "full" => Ok(AblationConfig::Full),
            "no_reflection" => Ok(AblationConfig::NoReflection),
            "no_news" => Ok(AblationConfig::NoNews),
            "no_txnstats" => Ok(AblationConfig::NoTxnstats),
            "no_technical" => Ok(AblationConfig::NoTechnical),
            "base" => Ok(AblationConfig::Base),
            other => Err(format!("unknown ablation config `{other}`")),
        }
    }
}

/// Kind of analyst report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Market,
    News,
    Reflection,
}

/// A report produced (or deterministically short-circuited) by one analyst.
/// `source_window` covers the dates of the inputs used and always ends
/// strictly before the decision day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalystReport {
    pub kind: ReportKind,
    pub text: String,
    pub source_window: Option<(NaiveDate, NaiveDate)>,
    pub truncated: bool,
}

/// Tunable knobs of the pipeline. Defaults follow the documented behavior:
/// 7 recent prices, 1-day news window, trailing-7-day reflection, 2 parse
/// retries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentOptions {
    pub recent_prices: usize,
    pub sma_window: usize,
    pub macd_fast: usize,
    pub macd_slow: usize,
    pub macd_signal: usize,
    pub bollinger_window: usize,
    pub bollinger_multiplier: f64,
    pub news_window_days: u64,
    pub news_article_char_cap: usize,
    pub news_total_char_budget: usize,
    pub reflection_window_days: u64,
    pub recent_txn_days: usize,
    pub parse_retries: u32,
}

impl Default for AgentOptions {
    fn default() -> Self {
        AgentOptions {
            recent_prices: 7,
            sma_window: 20,
            macd_fast: crate::indicators::MACD_FAST,
            macd_slow: crate::indicators::MACD_SLOW,
            macd_signal: crate::indicators::MACD_SIGNAL,
            bollinger_window: crate::indicators::BOLLINGER_WINDOW,
            bollinger_multiplier: crate::indicators::BOLLINGER_MULTIPLIER,
            news_window_days: 1,
            news_article_char_cap: 600,
            news_total_char_budget: 4000,
            reflection_window_days: 7,
            recent_txn_days: 7,
            parse_retries: 2,
        }
    }
}

/// The composable trading prompt. A section is present exactly when its flag
/// is set; `flags` is the effective per-day set (e.g. reflection drops out on
/// day one when there is no history yet).
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub base: String,
    pub technical: Option<String>,
    pub news_digest: Option<String>,
    pub txn_stats: Option<String>,
    pub reflection: Option<String>,
    pub flags: AblationFlags,
}

impl PromptBundle {
    /// Render the user prompt: base, then each active section under its
    /// marker, then the decision instruction.
    pub fn render(&self) -> String {
        debug_assert_eq!(self.technical.is_some(), self.flags.technical);
        debug_assert_eq!(self.news_digest.is_some(), self.flags.news);
        debug_assert_eq!(self.txn_stats.is_some(), self.flags.txn_stats);
        debug_assert_eq!(self.reflection.is_some(), self.flags.reflection);
        let mut out = self.base.clone();
        for (marker, section) in [
            (prompts::SECTION_TECHNICAL, &self.technical),
            (prompts::SECTION_NEWS, &self.news_digest),
            (prompts::SECTION_TXN_STATS, &self.txn_stats),
            (prompts::SECTION_REFLECTION, &self.reflection),
        ] {
            if let Some(text) = section {
                out.push('\n');
                out.push_str(marker);
                out.push('\n');
                out.push_str(text);
                if !text.ends_with('\n') {
                    out.push('\n');
                }
            }
        }
        out.push('\n');
        out.push_str(&prompts::decision_instruction());
        out
    }
}

/// Reports produced ahead of the trading decision on one day.
#[derive(Debug, Clone, Default)]
pub struct DayReports {
    pub market: Option<AnalystReport>,
    pub news: Option<AnalystReport>,
    pub reflection: Option<AnalystReport>,
}

fn backend_err(e: backend::BackendError) -> StrategyError {
    StrategyError::Backend(e.to_string())
}

/// Compose current indicator values into a prompt and request a
/// direction-and-momentum summary. With too little history for any windowed
/// indicator, returns a deterministic insufficient-data report without a
/// backend call.
pub fn build_market_report(
    ctx: &DecisionContext<'_>,
    asset: &Asset,
    backend: &dyn ChatBackend,
    options: &AgentOptions,
    log: &mut Vec<ModelExchange>,
) -> Result<AnalystReport, StrategyError> {
    let Some(block) = prompts::indicator_block(ctx, options) else {
        return Ok(AnalystReport {
            kind: ReportKind::Market,
            text: prompts::INSUFFICIENT_HISTORY_REPORT.to_string(),
            source_window: None,
            truncated: false,
        });
    };
    let user = prompts::market_prompt(ctx, asset, &block, options);
    let request = ChatRequest {
        kind: RequestKind::MarketReport,
        system: prompts::MARKET_SYSTEM_PROMPT.to_string(),
        user,
    };
    let response = complete_logged(backend, &request, ctx.date, log).map_err(backend_err)?;
    let window = ctx
        .prior_days
        .first()
        .map(|first| (first.date, ctx.prior_days.last().unwrap().date));
    Ok(AnalystReport {
        kind: ReportKind::Market,
        text: response,
        source_window: window,
        truncated: false,
    })
}

/// Concatenate the lagged news window into a summarization prompt. With no
/// articles in the window, returns a deterministic no-news report without a
/// backend call.
pub fn build_news_report(
    ctx: &DecisionContext<'_>,
    backend: &dyn ChatBackend,
    options: &AgentOptions,
    log: &mut Vec<ModelExchange>,
) -> Result<AnalystReport, StrategyError> {
    let earliest = ctx.date - chrono::Days::new(options.news_window_days);
    let items: Vec<&crate::dataio::NewsItem> = ctx
        .news
        .iter()
        .filter(|(date, _)| *date >= earliest && *date < ctx.date)
        .flat_map(|(_, items)| items.iter())
        .collect();
    if items.is_empty() {
        return Ok(AnalystReport {
            kind: ReportKind::News,
            text: prompts::NO_NEWS_REPORT.to_string(),
            source_window: None,
            truncated: false,
        });
    }
    let window = (
        items.iter().map(|i| i.date).min().unwrap(),
        items.iter().map(|i| i.date).max().unwrap(),
    );
    let (user, truncated) = prompts::news_prompt(&items, options);
    let request = ChatRequest {
        kind: RequestKind::NewsReport,
        system: prompts::NEWS_SYSTEM_PROMPT.to_string(),
        user,
    };
    let response = complete_logged(backend, &request, ctx.date, log).map_err(backend_err)?;
    Ok(AnalystReport {
        kind: ReportKind::News,
        text: response,
        source_window: Some(window),
        truncated,
    })
}

/// Build the retrospective report over the trailing week of decisions and
/// realized returns. Returns `None` (no section, no backend call) while the
/// history is empty, and also when the backend fails — the failed exchange is
/// logged and the run continues without a reflection that day.
pub fn run_reflection(
    ctx: &DecisionContext<'_>,
    backend: &dyn ChatBackend,
    options: &AgentOptions,
    log: &mut Vec<ModelExchange>,
) -> Option<AnalystReport> {
    let window =
        prompts::reflection_window(ctx.past_decisions, ctx.date, options.reflection_window_days);
    if window.is_empty() {
        return None;
    }
    let dates = (
        window.iter().map(|d| d.date).min().unwrap(),
        window.iter().map(|d| d.date).max().unwrap(),
    );
    let request = ChatRequest {
        kind: RequestKind::Reflection,
        system: prompts::REFLECTION_SYSTEM_PROMPT.to_string(),
        user: prompts::reflection_prompt(&window),
    };
    match complete_logged(backend, &request, ctx.date, log) {
        Ok(response) => Some(AnalystReport {
            kind: ReportKind::Reflection,
            text: response,
            source_window: Some(dates),
            truncated: false,
        }),
        Err(_) => None,
    }
}

/// Assemble the prompt bundle for one day: the base section always, plus
/// exactly the sections licensed by the config (minus sections with nothing
/// to show, e.g. reflection before any history exists).
pub fn build_trading_prompt(
    ctx: &DecisionContext<'_>,
    asset: &Asset,
    reports: &DayReports,
    config: AblationConfig,
    options: &AgentOptions,
) -> PromptBundle {
    let requested = config.flags();
    let technical = requested
        .technical
        .then(|| reports.market.as_ref().map(|r| r.text.clone()))
        .flatten();
    let news_digest = requested
        .news
        .then(|| reports.news.as_ref().map(|r| r.text.clone()))
        .flatten();
    let txn_stats = if requested.txn_stats {
        prompts::txn_stats_section(ctx.txn_stats, options.recent_txn_days)
    } else {
        None
    };
    let reflection = requested
        .reflection
        .then(|| reports.reflection.as_ref().map(|r| r.text.clone()))
        .flatten();
    let flags = AblationFlags {
        technical: technical.is_some(),
        news: news_digest.is_some(),
        txn_stats: txn_stats.is_some(),
        reflection: reflection.is_some(),
    };
    PromptBundle {
        base: prompts::base_section(ctx, asset, options),
        technical,
        news_digest,
        txn_stats,
        reflection,
        flags,
    }
}

fn complete_logged(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    date: NaiveDate,
    log: &mut Vec<ModelExchange>,
) -> Result<String, backend::BackendError> {
    let outcome = backend.complete(request);
    let (response_text, latency_ms) = match &outcome {
        Ok(r) => (r.text.clone(), r.latency.as_millis() as u64),
        Err(e) => (format!("[error] {e}"), 0),
    };
    log.push(ModelExchange {
        date,
        kind: request.kind,
        system_prompt: request.system.clone(),
        user_prompt: request.user.clone(),
        response: response_text,
        model_id: backend.model_id(),
        latency_ms,
        retries: 0,
    });
    outcome.map(|r| r.text)
}

/// The daily LLM pipeline as an engine strategy. Every backend exchange is
/// appended to the audit log, which survives an aborted run.
pub struct AgentStrategy {
    asset: Asset,
    config: AblationConfig,
    backend: Arc<dyn ChatBackend>,
    options: AgentOptions,
    audit: Vec<ModelExchange>,
}

impl AgentStrategy {
    pub fn new(
        asset: Asset,
        config: AblationConfig,
        backend: Arc<dyn ChatBackend>,
        options: AgentOptions,
    ) -> Self {
        AgentStrategy {
            asset,
            config,
            backend,
            options,
            audit: Vec::new(),
        }
    }

    pub fn audit_log(&self) -> &[ModelExchange] {
        &self.audit
    }

    /// Audit log as JSONL, one exchange per line.
    pub fn audit_log_jsonl(&self) -> String {
        let mut out = String::new();
        for exchange in &self.audit {
            out.push_str(&serde_json::to_string(exchange).expect("exchange serializes"));
            out.push('\n');
        }
        out
    }
}

impl Strategy for AgentStrategy {
    fn id(&self) -> String {
        format!("agent({})", self.config)
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let flags = self.config.flags();
        let mut reports = DayReports::default();
        if flags.technical {
            reports.market = Some(build_market_report(
                ctx,
                &self.asset,
                self.backend.as_ref(),
                &self.options,
                &mut self.audit,
            )?);
        }
        if flags.news {
            reports.news = Some(build_news_report(
                ctx,
                self.backend.as_ref(),
                &self.options,
                &mut self.audit,
            )?);
        }
        if flags.reflection {
            reports.reflection =
                run_reflection(ctx, self.backend.as_ref(), &self.options, &mut self.audit);
        }
        let bundle = build_trading_prompt(ctx, &self.asset, &reports, self.config, &self.options);
        let mut user = bundle.render();
        for retry in 0..=self.options.parse_retries {
            let request = ChatRequest {
                kind: RequestKind::Trading,
                system: prompts::TRADING_SYSTEM_PROMPT.to_string(),
                user: user.clone(),
            };
            let response =
                complete_logged(self.backend.as_ref(), &request, ctx.date, &mut self.audit)
                    .map_err(backend_err)?;
            if let Some(exchange) = self.audit.last_mut() {
                exchange.retries = retry;
            }
            if let Ok(action) = parse_action(&response) {
                return Ok(action);
            }
            user.push_str("\n\n");
            user.push_str(prompts::PARSE_RETRY_INSTRUCTION);
        }
        // All parse attempts failed: fall back to hold.
        Ok(TradeAction::HOLD)
    }
}
