//! Daily backtest loop: portfolio state, fractional actions with proportional
//! fees, and a per-day audit trail.
//!
//! Execution and valuation both use the daily open price: the strategy acts
//! at the open knowing only prior days plus today's open, and the run is
//! valued at the valuation day's open. News and txn-stats become visible with
//! a configurable lag (default one day) so that same-day items can never
//! inform the decision at the open.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{slice_split, DataError, Dataset, MarketDay, NewsItem, SplitSpec, TxnStatsDay};

/// Default proportional fee rate when none is configured.
pub const DEFAULT_FEE_RATE: f64 = 0.002;
/// Default visibility lag (days) for news and txn-stats.
pub const DEFAULT_INFO_LAG_DAYS: u64 = 1;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("trade fraction must be a number in [-1, 1], got {0}")]
    InvalidFraction(f64),
    #[error("fee rate must lie in [0, 1), got {0}")]
    InvalidFeeRate(f64),
    #[error("price must be finite and positive, got {0}")]
    InvalidPrice(f64),
    #[error("capital must be finite and positive, got {0}")]
    InvalidCapital(f64),
    #[error("strategy failed on {date}: {source}")]
    Strategy {
        date: NaiveDate,
        #[source]
        source: crate::strategies::StrategyError,
    },
}

/// A signed trade fraction in `[-1, 1]`: positive buys that fraction of
/// remaining cash, negative sells that fraction of current holdings, zero
/// holds. Validated at construction; NaN is rejected.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct TradeAction(f64);

impl TradeAction {
    pub const HOLD: TradeAction = TradeAction(0.0);

    pub fn new(fraction: f64) -> Result<Self, EngineError> {
        if !fraction.is_finite() || !(-1.0..=1.0).contains(&fraction) {
            return Err(EngineError::InvalidFraction(fraction));
        }
        Ok(TradeAction(fraction))
    }

    pub fn fraction(&self) -> f64 {
        self.0
    }
}

impl From<TradeAction> for f64 {
    fn from(a: TradeAction) -> f64 {
        a.0
    }
}

impl TryFrom<f64> for TradeAction {
    type Error = EngineError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        TradeAction::new(v)
    }
}

/// Proportional transaction fee on traded notional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct FeeModel {
    rate: f64,
}

impl FeeModel {
    pub const ZERO: FeeModel = FeeModel { rate: 0.0 };

    pub fn new(rate: f64) -> Result<Self, EngineError> {
        if !rate.is_finite() || !(0.0..1.0).contains(&rate) {
            return Err(EngineError::InvalidFeeRate(rate));
        }
        Ok(FeeModel { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl From<FeeModel> for f64 {
    fn from(f: FeeModel) -> f64 {
        f.rate
    }
}

impl TryFrom<f64> for FeeModel {
    type Error = EngineError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        FeeModel::new(v)
    }
}

/// Cash in USD plus asset holdings in units; never negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioState {
    pub cash: f64,
    pub holdings: f64,
}

impl PortfolioState {
    pub fn net_worth(&self, price: f64) -> f64 {
        self.cash + self.holdings * price
    }
}

/// Initialize a portfolio with `capital` split equally between cash and the
/// asset bought (fee-free) at the first open price.
pub fn init_portfolio(capital: f64, first_open: f64) -> Result<PortfolioState, EngineError> {
    if !capital.is_finite() || capital <= 0.0 {
        return Err(EngineError::InvalidCapital(capital));
    }
    if !first_open.is_finite() || first_open <= 0.0 {
        return Err(EngineError::InvalidPrice(first_open));
    }
    Ok(PortfolioState {
        cash: capital / 2.0,
        holdings: (capital / 2.0) / first_open,
    })
}

/// Apply one trade action at `price`, charging the proportional fee on the
/// traded notional. Returns the new state and the fee paid.
pub fn execute_action(
    state: &PortfolioState,
    price: f64,
    action: TradeAction,
    fee: FeeModel,
) -> Result<(PortfolioState, f64), EngineError> {
    if !price.is_finite() || price <= 0.0 {
        return Err(EngineError::InvalidPrice(price));
    }
    let a = action.fraction();
    let rate = fee.rate();
    if a > 0.0 {
        let spend = a * state.cash;
        let fee_paid = spend * rate;
        Ok((
            PortfolioState {
                cash: state.cash - spend,
                holdings: state.holdings + spend * (1.0 - rate) / price,
            },
            fee_paid,
        ))
    } else if a < 0.0 {
        let sold = -a * state.holdings;
        let fee_paid = sold * price * rate;
        Ok((
            PortfolioState {
                cash: state.cash + sold * price * (1.0 - rate),
                holdings: state.holdings - sold,
            },
            fee_paid,
        ))
    } else {
        Ok((*state, 0.0))
    }
}

/// One day of the audit trail; `net_worth` is valued at `execution_price`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub date: NaiveDate,
    pub execution_price: f64,
    pub action: TradeAction,
    pub fee_paid: f64,
    pub post_cash: f64,
    pub post_holdings: f64,
    pub net_worth: f64,
}

/// The complete result of one backtest run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub start_net_worth: f64,
    pub final_net_worth: f64,
}

/// A completed past decision visible to later days: the action taken and the
/// open-to-open return it realized on the following day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PastDecision {
    pub date: NaiveDate,
    pub action: TradeAction,
    pub realized_return: f64,
}

/// Everything a strategy may see when deciding on one day.
///
/// `prior_days` holds every dataset day strictly before `date` (including
/// days before the split start when the dataset carries warmup history); of
/// today only the open price is visible. No field derives from today's
/// high/low/close/volume or any later day.
#[derive(Debug, Clone)]
pub struct DecisionContext<'a> {
    pub date: NaiveDate,
    pub today_open: f64,
    pub prior_days: &'a [MarketDay],
    pub txn_stats: &'a [TxnStatsDay],
    pub news: Vec<(NaiveDate, &'a [NewsItem])>,
    pub portfolio: PortfolioState,
    pub past_decisions: &'a [PastDecision],
}

impl<'a> DecisionContext<'a> {
    /// Open prices of all visible days, oldest first, today's open last.
    pub fn open_history(&self) -> Vec<f64> {
        let mut opens: Vec<f64> = self.prior_days.iter().map(|d| d.open).collect();
        opens.push(self.today_open);
        opens
    }

    /// The last `n` (date, open) pairs including today, oldest first.
    pub fn recent_opens(&self, n: usize) -> Vec<(NaiveDate, f64)> {
        let mut recent: Vec<(NaiveDate, f64)> = self
            .prior_days
            .iter()
            .rev()
            .take(n.saturating_sub(1))
            .map(|d| (d.date, d.open))
            .collect();
        recent.reverse();
        recent.push((self.date, self.today_open));
        recent
    }

    pub fn is_first_day(&self) -> bool {
        self.past_decisions.is_empty()
    }
}

/// A daily decision function. Classical baselines are pure; the agent
/// pipeline keeps internal logs, hence `&mut self`.
pub trait Strategy {
    /// Stable identifier recorded in artifacts.
    fn id(&self) -> String;

    fn decide(
        &mut self,
        ctx: &DecisionContext<'_>,
    ) -> Result<TradeAction, crate::strategies::StrategyError>;
}

/// Run `strategy` over the split's trading days with the default info lag.
pub fn run_backtest(
    dataset: &Dataset,
    split: &SplitSpec,
    strategy: &mut dyn Strategy,
    fee: FeeModel,
    capital: f64,
) -> Result<RunResult, EngineError> {
    run_backtest_with_lag(
        dataset,
        split,
        strategy,
        fee,
        capital,
        DEFAULT_INFO_LAG_DAYS,
    )
}

/// Run `strategy` over the split's trading days with an explicit news and
/// txn-stats visibility lag (0 makes same-day items visible).
pub fn run_backtest_with_lag(
    dataset: &Dataset,
    split: &SplitSpec,
    strategy: &mut dyn Strategy,
    fee: FeeModel,
    capital: f64,
    info_lag_days: u64,
) -> Result<RunResult, EngineError> {
    let (trading_days, valuation_day) = slice_split(dataset, split)?;
    let market = dataset.market();
    let start_idx = market
        .binary_search_by_key(&trading_days[0].date, |d| d.date)
        .expect("slice_split verified the start day exists");

    let mut state = init_portfolio(capital, trading_days[0].open)?;
    let mut records: Vec<RunRecord> = Vec::with_capacity(trading_days.len());
    let mut past: Vec<PastDecision> = Vec::with_capacity(trading_days.len());

    for (i, day) in trading_days.iter().enumerate() {
        // Realize yesterday's decision against today's open before deciding.
        if let (Some(prev), Some(prev_record)) = (past.last_mut(), records.last()) {
            prev.realized_return = state.net_worth(day.open) / prev_record.net_worth - 1.0;
        }

        let cutoff = day.date - chrono::Days::new(info_lag_days);
        let txn_visible = dataset.txn_stats().partition_point(|t| t.date <= cutoff);
        let news: Vec<(NaiveDate, &[NewsItem])> = dataset
            .news()
            .range(..=cutoff)
            .map(|(d, items)| (*d, items.as_slice()))
            .collect();

        let ctx = DecisionContext {
            date: day.date,
            today_open: day.open,
            prior_days: &market[..start_idx + i],
            txn_stats: &dataset.txn_stats()[..txn_visible],
            news,
            portfolio: state,
            past_decisions: &past,
        };
        let action = strategy
            .decide(&ctx)
            .map_err(|source| EngineError::Strategy {
                date: day.date,
                source,
            })?;
        let (new_state, fee_paid) = execute_action(&state, day.open, action, fee)?;
        state = new_state;
        records.push(RunRecord {
            date: day.date,
            execution_price: day.open,
            action,
            fee_paid,
            post_cash: state.cash,
            post_holdings: state.holdings,
            net_worth: state.net_worth(day.open),
        });
        past.push(PastDecision {
            date: day.date,
            action,
            realized_return: 0.0,
        });
    }

    Ok(RunResult {
        records,
        start_net_worth: capital,
        final_net_worth: state.net_worth(valuation_day.open),
    })
}
