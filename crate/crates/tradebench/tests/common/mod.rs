//! Shared test oracles and deterministic generators, independent of the
//! implementation paths they check.

#![allow(dead_code)]

use chrono::{Datelike, NaiveDate};
use tradebench::dataio::{Dataset, MarketDay, SplitSpec};
use tradebench::engine::{DecisionContext, Strategy, TradeAction};
use tradebench::strategies::StrategyError;

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64) so test cases are reproducible without a
// rand dependency.
// ---------------------------------------------------------------------------

pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut x = self.0;
        x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
        x ^ (x >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.unit() * (hi - lo)
    }

    pub fn usize_in(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }
}

/// A positive random-walk price series.
pub fn random_prices(rng: &mut TestRng, len: usize) -> Vec<f64> {
    let mut prices = Vec::with_capacity(len);
    let mut p = rng.range(10.0, 5000.0);
    for _ in 0..len {
        prices.push(p);
        p *= rng.range(0.92, 1.09);
    }
    prices
}

/// A random action sequence in [-1, 1].
pub fn random_actions(rng: &mut TestRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.range(-1.0, 1.0)).collect()
}

// ---------------------------------------------------------------------------
// Dataset construction
// ---------------------------------------------------------------------------

pub fn market_from_opens(start: &str, opens: &[f64]) -> Vec<MarketDay> {
    let start: NaiveDate = start.parse().unwrap();
    opens
        .iter()
        .enumerate()
        .map(|(i, &open)| MarketDay {
            date: start + chrono::Days::new(i as u64),
            open,
            high: open * 1.02,
            low: open * 0.98,
            close: open,
            volume: 1.0e9,
            market_cap: 1.0e11,
        })
        .collect()
}

pub fn dataset_from_opens(start: &str, opens: &[f64]) -> Dataset {
    Dataset::new(market_from_opens(start, opens)).unwrap()
}

/// A split covering all but the last day of the dataset (the last day is the
/// valuation day).
pub fn split_over(dataset: &Dataset) -> SplitSpec {
    let market = dataset.market();
    SplitSpec::new(
        "ETH".parse().unwrap(),
        "custom".parse().unwrap(),
        market[0].date,
        market[market.len() - 1].date,
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Strategies used as probes
// ---------------------------------------------------------------------------

/// Plays back a fixed action sequence, one per day.
pub struct SequenceStrategy {
    pub actions: Vec<f64>,
    pub next: usize,
}

impl SequenceStrategy {
    pub fn new(actions: Vec<f64>) -> Self {
        SequenceStrategy { actions, next: 0 }
    }
}

impl Strategy for SequenceStrategy {
    fn id(&self) -> String {
        "sequence".into()
    }

    fn decide(&mut self, _ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let action = self.actions[self.next.min(self.actions.len() - 1)];
        self.next += 1;
        Ok(TradeAction::new(action).expect("test actions are in range"))
    }
}

/// Hashes every visible field of the context into an action, so any leak of
/// future data into the context changes the emitted action.
pub struct ChecksumStrategy;

fn mix(state: &mut u64, value: u64) {
    *state = state
        .wrapping_mul(0x100000001b3)
        .wrapping_add(value.rotate_left(17) ^ 0x9e37);
}

fn mix_f64(state: &mut u64, value: f64) {
    mix(state, value.to_bits());
}

impl Strategy for ChecksumStrategy {
    fn id(&self) -> String {
        "checksum".into()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let mut state = 0xcbf29ce484222325u64;
        mix(&mut state, ctx.date.num_days_from_ce() as u64);
        mix_f64(&mut state, ctx.today_open);
        for d in ctx.prior_days {
            mix(&mut state, d.date.num_days_from_ce() as u64);
            for v in [d.open, d.high, d.low, d.close, d.volume, d.market_cap] {
                mix_f64(&mut state, v);
            }
        }
        for t in ctx.txn_stats {
            mix(&mut state, t.num_transactions);
            mix(&mut state, t.active_wallets);
            mix_f64(&mut state, t.total_value_transferred);
            mix_f64(&mut state, t.avg_gas_price);
            mix_f64(&mut state, t.total_gas_consumed);
        }
        for (date, items) in &ctx.news {
            mix(&mut state, date.num_days_from_ce() as u64);
            for item in *items {
                mix(&mut state, item.title.len() as u64);
                mix(&mut state, item.body_or_summary.len() as u64);
            }
        }
        mix_f64(&mut state, ctx.portfolio.cash);
        mix_f64(&mut state, ctx.portfolio.holdings);
        for p in ctx.past_decisions {
            mix_f64(&mut state, p.action.fraction());
            mix_f64(&mut state, p.realized_return);
        }
        let unit = (state >> 11) as f64 / (1u64 << 53) as f64;
        Ok(TradeAction::new(unit * 2.0 - 1.0).expect("in range"))
    }
}

// ---------------------------------------------------------------------------
// Brute-force indicator oracles (summation / scan routes, independent of the
// library's recursions)
// ---------------------------------------------------------------------------

pub fn sma_oracle(values: &[f64], window: usize) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(values.len());
    for t in 0..values.len() {
        if t + 1 < window {
            out.push(None);
        } else {
            let mut sum = 0.0;
            for i in t + 1 - window..=t {
                sum += values[i];
            }
            out.push(Some(sum / window as f64));
        }
    }
    out
}

/// EMA by the closed-form weighted sum: w_i = a(1-a)^i for lags i < t and
/// (1-a)^t for the seed.
pub fn ema_oracle(values: &[f64], window: usize) -> Vec<f64> {
    let alpha = 2.0 / (window as f64 + 1.0);
    let mut out = Vec::with_capacity(values.len());
    for t in 0..values.len() {
        let mut acc = 0.0;
        for lag in 0..t {
            acc += alpha * (1.0 - alpha).powi(lag as i32) * values[t - lag];
        }
        acc += (1.0 - alpha).powi(t as i32) * values[0];
        out.push(acc);
    }
    out
}

pub fn macd_oracle(
    values: &[f64],
    fast: usize,
    slow: usize,
    signal: usize,
) -> Vec<(f64, f64, f64)> {
    let fast_ema = ema_oracle(values, fast);
    let slow_ema = ema_oracle(values, slow);
    let line: Vec<f64> = fast_ema.iter().zip(&slow_ema).map(|(f, s)| f - s).collect();
    let signal_line = ema_oracle(&line, signal);
    line.iter()
        .zip(&signal_line)
        .map(|(&m, &s)| (m, s, m - s))
        .collect()
}

pub fn bollinger_oracle(
    values: &[f64],
    window: usize,
    multiplier: f64,
) -> Vec<Option<(f64, f64, f64)>> {
    let mut out = Vec::with_capacity(values.len());
    for t in 0..values.len() {
        if t + 1 < window {
            out.push(None);
            continue;
        }
        let slice = &values[t + 1 - window..=t];
        let mean = slice.iter().sum::<f64>() / window as f64;
        let mut var = 0.0;
        for v in slice {
            var += (v - mean) * (v - mean);
        }
        var /= window as f64;
        let half = multiplier * var.sqrt();
        out.push(Some((mean - half, mean, mean + half)));
    }
    out
}

pub fn assert_rel_close(got: f64, want: f64, tol: f64, what: &str) {
    let scale = 1.0_f64.max(got.abs()).max(want.abs());
    assert!(
        (got - want).abs() <= tol * scale,
        "{what}: {got} vs {want} (tol {tol})"
    );
}
