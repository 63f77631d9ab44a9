//! Prompt wording for the analyst and trading agents.
//!
//! Everything here is a pure string function; golden tests pin the exact
//! wording, so edits here are breaking changes to fixture-driven mocks.

use chrono::NaiveDate;

use crate::dataio::Asset;
use crate::engine::{DecisionContext, PastDecision};
use crate::indicators::{bollinger, macd, sma, PriceSeries};

use super::AgentOptions;

pub const SECTION_TECHNICAL: &str = "[TECHNICAL REPORT]";
pub const SECTION_NEWS: &str = "[NEWS DIGEST]";
pub const SECTION_TXN_STATS: &str = "[ON-CHAIN STATS]";
pub const SECTION_REFLECTION: &str = "[REFLECTION]";
pub const SECTION_DECISION: &str = "[DECISION]";

pub const TRADING_SYSTEM_PROMPT: &str = "You are an experienced cryptocurrency trading \
assistant. Each day you receive the portfolio state and market context, weigh them, and \
recommend exactly one trading action.";

pub const MARKET_SYSTEM_PROMPT: &str = "You are a cryptocurrency market analyst. You study \
technical indicators computed from daily prices and describe the market's direction and \
momentum.";

pub const NEWS_SYSTEM_PROMPT: &str = "You are a cryptocurrency news analyst. You pinpoint \
relevant recent events and assess the significance and market impact of key topics.";

pub const REFLECTION_SYSTEM_PROMPT: &str = "You review a crypto trading agent's recent \
decisions and their realized returns to identify which information mattered most.";

/// Appended to the trading prompt when a response failed to parse.
pub const PARSE_RETRY_INSTRUCTION: &str =
    "Your previous reply contained no valid action. Respond with a single number in [-1, 1] \
on a line of the form `action: <number>`.";

pub const NO_NEWS_REPORT: &str = "No recent news is available for this period.";
pub const INSUFFICIENT_HISTORY_REPORT: &str =
    "Insufficient price history to compute technical indicators.";

/// The always-present base section: rules, action space, portfolio state, and
/// the most recent open prices (today's last).
pub fn base_section(ctx: &DecisionContext<'_>, asset: &Asset, options: &AgentOptions) -> String {
    let mut out = String::new();
    out.push_str("[RULES]\n");
    out.push_str(&format!(
        "You trade {asset} against US dollars at most once per day, at the day's open price.\n"
    ));
    out.push_str(
        "Buying with a fraction in (0, 1] spends that fraction of remaining cash; selling \
with a fraction in [-1, 0) sells that share of current holdings; 0 holds.\n",
    );
    out.push_str("A proportional transaction fee is charged on every trade.\n\n");
    out.push_str("[PORTFOLIO]\n");
    out.push_str(&format!("date: {}\n", ctx.date));
    out.push_str(&format!("cash_usd: {:.2}\n", ctx.portfolio.cash));
    out.push_str(&format!(
        "holdings_units: {:.6}\n\n",
        ctx.portfolio.holdings
    ));
    out.push_str("[RECENT OPEN PRICES]\n");
    for (date, open) in ctx.recent_opens(options.recent_prices) {
        out.push_str(&format!("{date}: {open:.2}\n"));
    }
    out
}

/// Indicator block over opens strictly before today, or `None` while no
/// windowed indicator has warmed up.
pub fn indicator_block(ctx: &DecisionContext<'_>, options: &AgentOptions) -> Option<String> {
    let opens: Vec<f64> = ctx.prior_days.iter().map(|d| d.open).collect();
    let n = opens.len();
    let sma_ready = n >= options.sma_window;
    let bollinger_ready = n >= options.bollinger_window;
    let macd_ready = n >= options.macd_slow;
    if !(sma_ready || bollinger_ready || macd_ready) {
        return None;
    }
    let series = PriceSeries::new(opens).expect("market prices are validated");
    let mut out = String::new();
    if sma_ready {
        let values = sma(&series, options.sma_window).expect("window validated");
        if let Some(Some(v)) = values.last() {
            out.push_str(&format!("SMA({}): {v:.2}\n", options.sma_window));
        }
    }
    if macd_ready {
        let points = macd(
            &series,
            options.macd_fast,
            options.macd_slow,
            options.macd_signal,
        )
        .expect("windows validated");
        if let Some(p) = points.last() {
            out.push_str(&format!("MACD: {:.2}\n", p.macd));
            out.push_str(&format!("MACD SIGNAL: {:.2}\n", p.signal));
        }
    }
    if bollinger_ready {
        let bands = bollinger(
            &series,
            options.bollinger_window,
            options.bollinger_multiplier,
        )
        .expect("window validated");
        if let Some(Some(b)) = bands.last() {
            out.push_str(&format!(
                "BOLLINGER: lower {:.2}, middle {:.2}, upper {:.2}\n",
                b.lower, b.middle, b.upper
            ));
        }
    }
    Some(out)
}

/// User prompt for the market analyst.
pub fn market_prompt(
    ctx: &DecisionContext<'_>,
    asset: &Asset,
    indicator_block: &str,
    options: &AgentOptions,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("asset: {asset}\ndate: {}\n\n", ctx.date));
    out.push_str("[INDICATORS]\n");
    out.push_str(indicator_block);
    out.push_str("\n[RECENT OPEN PRICES]\n");
    let recent: Vec<&crate::dataio::MarketDay> = ctx
        .prior_days
        .iter()
        .rev()
        .take(options.recent_prices)
        .collect();
    for day in recent.into_iter().rev() {
        out.push_str(&format!("{}: {:.2}\n", day.date, day.open));
    }
    out.push_str("\nSummarize the market's direction and momentum in a short report.\n");
    out
}

/// One rendered news article, body truncated to `cap` characters.
fn render_article(item: &crate::dataio::NewsItem, cap: usize) -> (String, bool) {
    let body: String = item.body_or_summary.chars().take(cap).collect();
    let truncated = body.len() < item.body_or_summary.len();
    (
        format!(
            "{} | {} | {}\n{}\n",
            item.date, item.source, item.title, body
        ),
        truncated,
    )
}

/// User prompt for the news analyst over the given articles (oldest first).
/// Articles are truncated per-item, then dropped oldest-first to fit the
/// total budget; the newest article always survives. Returns the prompt and
/// whether anything was truncated or dropped.
pub fn news_prompt(items: &[&crate::dataio::NewsItem], options: &AgentOptions) -> (String, bool) {
    let mut rendered: Vec<String> = Vec::with_capacity(items.len());
    let mut truncated = false;
    for item in items {
        let (text, t) = render_article(item, options.news_article_char_cap);
        truncated |= t;
        rendered.push(text);
    }
    let mut start = 0;
    let total = |chunk: &[String]| chunk.iter().map(|s| s.len()).sum::<usize>();
    while rendered.len() - start > 1 && total(&rendered[start..]) > options.news_total_char_budget {
        start += 1;
        truncated = true;
    }
    let mut out = String::from("[ARTICLES]\n");
    for text in &rendered[start..] {
        out.push_str(text);
    }
    out.push_str(
        "\nSummarize the most significant recent events and their likely market impact.\n",
    );
    (out, truncated)
}

/// User prompt for the reflection agent over completed past decisions.
pub fn reflection_prompt(decisions: &[&PastDecision]) -> String {
    let mut out = String::from("[RECENT DECISIONS]\n");
    for d in decisions {
        out.push_str(&format!(
            "{}: action {}, next-day return {:+.2}%\n",
            d.date,
            d.action.fraction(),
            d.realized_return * 100.0
        ));
    }
    out.push_str(
        "\nIdentify which information was most impactful to these returns and advise what \
to prioritize in tomorrow's decision.\n",
    );
    out
}

/// On-chain stats section from the visible (lagged) txn-stats history.
pub fn txn_stats_section(
    stats: &[crate::dataio::TxnStatsDay],
    recent_days: usize,
) -> Option<String> {
    if stats.is_empty() {
        return None;
    }
    let start = stats.len().saturating_sub(recent_days);
    let mut out = String::new();
    for s in &stats[start..] {
        out.push_str(&format!(
            "{}: txns {}, active_wallets {}, value_transferred {}, avg_gas_price {}, \
gas_consumed {}\n",
            s.date,
            s.num_transactions,
            s.active_wallets,
            s.total_value_transferred,
            s.avg_gas_price,
            s.total_gas_consumed
        ));
    }
    Some(out)
}

/// Final instruction block of the trading prompt.
pub fn decision_instruction() -> String {
    format!(
        "{SECTION_DECISION}\nWeigh the information above and reply with a short rationale \
followed by a final line of the form `action: <number in [-1, 1]>`.\n"
    )
}

/// Reflection window filter: decisions within the trailing `window_days`
/// calendar days before `today`.
pub fn reflection_window<'a>(
    past: &'a [PastDecision],
    today: NaiveDate,
    window_days: u64,
) -> Vec<&'a PastDecision> {
    let earliest = today - chrono::Days::new(window_days);
    past.iter().filter(|d| d.date >= earliest).collect()
}
