//! Classical baseline strategies, a forecaster-driven strategy, and the
//! validation-split grid tuner.
//!
//! All baselines emit full-position signals in {-1, 0, +1} and are pure
//! functions of the decision context. The SMA baseline is level-based (price
//! vs. its trailing average); SLMA and MACD trade on crossovers; Bollinger
//! trades mean reversion outside the bands.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataio::{Asset, DataError, Dataset, SplitSpec};
use crate::engine::{run_backtest, DecisionContext, FeeModel, RunResult, Strategy, TradeAction};
use crate::indicators::{
    bollinger, macd, IndicatorError, PriceSeries, BOLLINGER_MULTIPLIER, BOLLINGER_WINDOW,
    MACD_FAST, MACD_SIGNAL, MACD_SLOW,
};
use crate::metrics::{summarize, MetricsError, MetricsSummary};

/// Default SMA tuning grid, also the source of SLMA short/long pairs.
pub const SMA_WINDOW_GRID: [usize; 5] = [5, 10, 15, 20, 30];

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error("slma requires short < long, got short={short} long={long}")]
    BadSlmaWindows { short: usize, long: usize },
    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),
    #[error("parameter `{name}` is out of range: {reason}")]
    BadParam { name: &'static str, reason: String },
    #[error("unknown strategy kind `{0}`")]
    UnknownKind(String),
    #[error("predictor returned an invalid next-day price {value} on {date}")]
    InvalidPrediction { date: NaiveDate, value: f64 },
    #[error("prediction file has no entry for {0}")]
    MissingPrediction(NaiveDate),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("tuning grid is empty")]
    EmptyGrid,
    #[error("tuning run failed for `{spec}`: {reason}")]
    TuneRun { spec: String, reason: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

// ---------------------------------------------------------------------------
// Strategy specs
// ---------------------------------------------------------------------------

/// A fully-resolved strategy identity: kind plus complete, in-range
/// parameters. Serializes as `{kind, params}` for artifacts and caches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum StrategySpec {
    BuyAndHold,
    Sma {
        window: usize,
    },
    Slma {
        short: usize,
        long: usize,
    },
    Macd {
        fast: usize,
        slow: usize,
        signal: usize,
    },
    Bollinger {
        window: usize,
        multiplier: f64,
    },
    Forecaster {
        predictions: Option<String>,
    },
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::BuyAndHold => write!(f, "buy_and_hold"),
            StrategySpec::Sma { window } => write!(f, "sma(window={window})"),
            StrategySpec::Slma { short, long } => write!(f, "slma(short={short},long={long})"),
            StrategySpec::Macd { fast, slow, signal } => {
                write!(f, "macd(fast={fast},slow={slow},signal={signal})")
            }
            StrategySpec::Bollinger { window, multiplier } => {
                write!(f, "bollinger(window={window},multiplier={multiplier})")
            }
            StrategySpec::Forecaster { predictions: None } => write!(f, "forecaster(momentum)"),
            StrategySpec::Forecaster {
                predictions: Some(p),
            } => write!(f, "forecaster(file={p})"),
        }
    }
}

impl StrategySpec {
    /// Build a spec from a kind name and a key=value parameter map, applying
    /// documented defaults for omitted parameters and validating ranges.
    pub fn from_parts(
        kind: &str,
        params: &BTreeMap<String, String>,
    ) -> Result<Self, StrategyError> {
        let get_usize = |name: &'static str, default: usize| -> Result<usize, StrategyError> {
            match params.get(name) {
                None => Ok(default),
                Some(raw) => raw.parse().map_err(|_| StrategyError::BadParam {
                    name,
                    reason: format!("`{raw}` is not a positive integer"),
                }),
            }
        };
        let spec = match kind {
            "buy_and_hold" => StrategySpec::BuyAndHold,
            "sma" => StrategySpec::Sma {
                window: get_usize("window", 20)?,
            },
            "slma" => StrategySpec::Slma {
                short: get_usize("short", 5)?,
                long: get_usize("long", 20)?,
            },
            "macd" => StrategySpec::Macd {
                fast: get_usize("fast", MACD_FAST)?,
                slow: get_usize("slow", MACD_SLOW)?,
                signal: get_usize("signal", MACD_SIGNAL)?,
            },
            "bollinger" => {
                let multiplier = match params.get("multiplier") {
                    None => BOLLINGER_MULTIPLIER,
                    Some(raw) => raw.parse().map_err(|_| StrategyError::BadParam {
                        name: "multiplier",
                        reason: format!("`{raw}` is not a number"),
                    })?,
                };
                StrategySpec::Bollinger {
                    window: get_usize("window", BOLLINGER_WINDOW)?,
                    multiplier,
                }
            }
            "forecaster" => StrategySpec::Forecaster {
                predictions: params.get("predictions").cloned(),
            },
            other => return Err(StrategyError::UnknownKind(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        match *self {
            StrategySpec::BuyAndHold | StrategySpec::Forecaster { .. } => Ok(()),
            StrategySpec::Sma { window } => {
                if window == 0 {
                    return Err(StrategyError::BadParam {
                        name: "window",
                        reason: "must be at least 1".into(),
                    });
                }
                Ok(())
            }
            StrategySpec::Slma { short, long } => {
                if short == 0 {
                    return Err(StrategyError::BadParam {
                        name: "short",
                        reason: "must be at least 1".into(),
                    });
                }
                if short >= long {
                    return Err(StrategyError::BadSlmaWindows { short, long });
                }
                Ok(())
            }
            StrategySpec::Macd { fast, slow, signal } => {
                if fast == 0 || signal == 0 {
                    return Err(StrategyError::BadParam {
                        name: "fast/signal",
                        reason: "must be at least 1".into(),
                    });
                }
                if fast >= slow {
                    return Err(StrategyError::BadParam {
                        name: "fast",
                        reason: format!("must be below slow ({slow})"),
                    });
                }
                Ok(())
            }
            StrategySpec::Bollinger { window, multiplier } => {
                if window < 2 {
                    return Err(StrategyError::BadParam {
                        name: "window",
                        reason: "must be at least 2".into(),
                    });
                }
                if !multiplier.is_finite() || multiplier <= 0.0 {
                    return Err(StrategyError::BadParam {
                        name: "multiplier",
                        reason: "must be positive".into(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Instantiate the decision function. Forecaster file predictions are
    /// loaded here.
    pub fn build(&self) -> Result<Box<dyn Strategy>, StrategyError> {
        self.validate()?;
        Ok(match self.clone() {
            StrategySpec::BuyAndHold => Box::new(BuyAndHold),
            StrategySpec::Sma { window } => Box::new(SmaStrategy { window }),
            StrategySpec::Slma { short, long } => Box::new(SlmaStrategy { short, long }),
            StrategySpec::Macd { fast, slow, signal } => {
                Box::new(MacdStrategy { fast, slow, signal })
            }
            StrategySpec::Bollinger { window, multiplier } => {
                Box::new(BollingerStrategy { window, multiplier })
            }
            StrategySpec::Forecaster { predictions: None } => {
                Box::new(ForecasterStrategy::new(MomentumPredictor))
            }
            StrategySpec::Forecaster {
                predictions: Some(path),
            } => {
                let predictor = FilePredictor::load(Path::new(&path))?;
                Box::new(ForecasterStrategy::new(predictor))
            }
        })
    }

    /// Parameter vector used as the deterministic tuning tie-break.
    fn param_vector(&self) -> Vec<f64> {
        match *self {
            StrategySpec::BuyAndHold | StrategySpec::Forecaster { .. } => vec![],
            StrategySpec::Sma { window } => vec![window as f64],
            StrategySpec::Slma { short, long } => vec![short as f64, long as f64],
            StrategySpec::Macd { fast, slow, signal } => {
                vec![fast as f64, slow as f64, signal as f64]
            }
            StrategySpec::Bollinger { window, multiplier } => vec![window as f64, multiplier],
        }
    }
}

/// The default tuning grid for a strategy kind.
pub fn default_grid(kind: &str) -> Result<Vec<StrategySpec>, StrategyError> {
    match kind {
        "buy_and_hold" => Ok(vec![StrategySpec::BuyAndHold]),
        "sma" => Ok(SMA_WINDOW_GRID
            .iter()
            .map(|&window| StrategySpec::Sma { window })
            .collect()),
        "slma" => {
            let mut grid = Vec::new();
            for (i, &short) in SMA_WINDOW_GRID.iter().enumerate() {
                for &long in &SMA_WINDOW_GRID[i + 1..] {
                    grid.push(StrategySpec::Slma { short, long });
                }
            }
            Ok(grid)
        }
        "macd" => Ok(vec![StrategySpec::Macd {
            fast: MACD_FAST,
            slow: MACD_SLOW,
            signal: MACD_SIGNAL,
        }]),
        "bollinger" => Ok(vec![StrategySpec::Bollinger {
            window: BOLLINGER_WINDOW,
            multiplier: BOLLINGER_MULTIPLIER,
        }]),
        "forecaster" => Ok(vec![StrategySpec::Forecaster { predictions: None }]),
        other => Err(StrategyError::UnknownKind(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

fn full_buy() -> TradeAction {
    TradeAction::new(1.0).expect("in range")
}

fn full_sell() -> TradeAction {
    TradeAction::new(-1.0).expect("in range")
}

/// Buy with all cash on the first trading day, then hold.
pub struct BuyAndHold;

impl Strategy for BuyAndHold {
    fn id(&self) -> String {
        "buy_and_hold".into()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        Ok(if ctx.is_first_day() {
            full_buy()
        } else {
            TradeAction::HOLD
        })
    }
}

fn trailing_sma(opens: &[f64], window: usize, t: usize) -> Option<f64> {
    (t + 1 >= window).then(|| opens[t + 1 - window..=t].iter().sum::<f64>() / window as f64)
}

/// Level-based SMA signal: long when price is above its trailing average,
/// short when below.
pub struct SmaStrategy {
    pub window: usize,
}

impl Strategy for SmaStrategy {
    fn id(&self) -> String {
        StrategySpec::Sma {
            window: self.window,
        }
        .to_string()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let opens = ctx.open_history();
        let t = opens.len() - 1;
        Ok(match trailing_sma(&opens, self.window, t) {
            None => TradeAction::HOLD,
            Some(avg) => {
                if ctx.today_open > avg {
                    full_buy()
                } else if ctx.today_open < avg {
                    full_sell()
                } else {
                    TradeAction::HOLD
                }
            }
        })
    }
}

/// Short/long SMA crossover: buy on the golden cross (short crosses from at
/// or below to above the long), sell on the opposite crossing.
pub struct SlmaStrategy {
    pub short: usize,
    pub long: usize,
}

impl Strategy for SlmaStrategy {
    fn id(&self) -> String {
        StrategySpec::Slma {
            short: self.short,
            long: self.long,
        }
        .to_string()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        if self.short >= self.long {
            return Err(StrategyError::BadSlmaWindows {
                short: self.short,
                long: self.long,
            });
        }
        let opens = ctx.open_history();
        let t = opens.len() - 1;
        if t == 0 {
            return Ok(TradeAction::HOLD);
        }
        let today = (
            trailing_sma(&opens, self.short, t),
            trailing_sma(&opens, self.long, t),
        );
        let yesterday = (
            trailing_sma(&opens, self.short, t - 1),
            trailing_sma(&opens, self.long, t - 1),
        );
        Ok(match (yesterday, today) {
            ((Some(ys), Some(yl)), (Some(ts), Some(tl))) => {
                if ys <= yl && ts > tl {
                    full_buy()
                } else if ys >= yl && ts < tl {
                    full_sell()
                } else {
                    TradeAction::HOLD
                }
            }
            _ => TradeAction::HOLD,
        })
    }
}

/// MACD/signal-line crossover.
pub struct MacdStrategy {
    pub fast: usize,
    pub slow: usize,
    pub signal: usize,
}

impl Strategy for MacdStrategy {
    fn id(&self) -> String {
        StrategySpec::Macd {
            fast: self.fast,
            slow: self.slow,
            signal: self.signal,
        }
        .to_string()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let opens = ctx.open_history();
        if opens.len() < 2 {
            return Ok(TradeAction::HOLD);
        }
        let series = PriceSeries::new(opens)?;
        let points = macd(&series, self.fast, self.slow, self.signal)?;
        let prev = points[points.len() - 2].histogram;
        let today = points[points.len() - 1].histogram;
        Ok(if prev <= 0.0 && today > 0.0 {
            full_buy()
        } else if prev >= 0.0 && today < 0.0 {
            full_sell()
        } else {
            TradeAction::HOLD
        })
    }
}

/// Mean-reversion on Bollinger Bands: buy below the lower band, sell above
/// the upper band.
pub struct BollingerStrategy {
    pub window: usize,
    pub multiplier: f64,
}

impl Strategy for BollingerStrategy {
    fn id(&self) -> String {
        StrategySpec::Bollinger {
            window: self.window,
            multiplier: self.multiplier,
        }
        .to_string()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let opens = ctx.open_history();
        let t = opens.len() - 1;
        let series = PriceSeries::new(opens)?;
        let bands = bollinger(&series, self.window, self.multiplier)?;
        Ok(match bands[t] {
            None => TradeAction::HOLD,
            Some(p) => {
                if ctx.today_open < p.lower {
                    full_buy()
                } else if ctx.today_open > p.upper {
                    full_sell()
                } else {
                    TradeAction::HOLD
                }
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Forecaster strategy
// ---------------------------------------------------------------------------

/// Predicts the next day's open price from the visible context.
pub trait Predictor {
    fn name(&self) -> String;

    fn predict_next_open(&self, ctx: &DecisionContext<'_>) -> Result<f64, StrategyError>;
}

/// Naive momentum: predicts `today + (today - yesterday)`; with no yesterday
/// it predicts today's price (hold).
pub struct MomentumPredictor;

impl Predictor for MomentumPredictor {
    fn name(&self) -> String {
        "momentum".into()
    }

    fn predict_next_open(&self, ctx: &DecisionContext<'_>) -> Result<f64, StrategyError> {
        Ok(match ctx.prior_days.last() {
            Some(yesterday) => 2.0 * ctx.today_open - yesterday.open,
            None => ctx.today_open,
        })
    }
}

/// Always predicts today's price; useful as the neutral reference.
pub struct PersistencePredictor;

impl Predictor for PersistencePredictor {
    fn name(&self) -> String {
        "persistence".into()
    }

    fn predict_next_open(&self, ctx: &DecisionContext<'_>) -> Result<f64, StrategyError> {
        Ok(ctx.today_open)
    }
}

/// Per-date predictions loaded from a CSV with header `date,predicted_next_open`.
pub struct FilePredictor {
    predictions: BTreeMap<NaiveDate, f64>,
}

pub const PREDICTION_CSV_HEADER: &str = "date,predicted_next_open";

impl FilePredictor {
    pub fn load(path: &Path) -> Result<Self, StrategyError> {
        let path_str = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| {
            StrategyError::Data(DataError::Io {
                path: path_str.clone(),
                source: e,
            })
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(file);
        let headers: Vec<String> = reader
            .headers()
            .map(|h| h.iter().map(|s| s.trim().to_string()).collect())
            .unwrap_or_default();
        if headers.join(",") != PREDICTION_CSV_HEADER {
            return Err(StrategyError::Data(DataError::HeaderMismatch {
                path: path_str,
                expected: PREDICTION_CSV_HEADER,
            }));
        }
        let mut predictions = BTreeMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                StrategyError::Data(DataError::MalformedRow {
                    path: path_str.clone(),
                    line: e.position().map(|p| p.line()).unwrap_or(0),
                    reason: e.to_string(),
                })
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let malformed = |reason: String| {
                StrategyError::Data(DataError::MalformedRow {
                    path: path_str.clone(),
                    line,
                    reason,
                })
            };
            let date: NaiveDate = record
                .get(0)
                .ok_or_else(|| malformed("missing date".into()))?
                .trim()
                .parse()
                .map_err(|_| malformed("bad date".into()))?;
            let value: f64 = record
                .get(1)
                .ok_or_else(|| malformed("missing prediction".into()))?
                .trim()
                .parse()
                .map_err(|_| malformed("bad prediction".into()))?;
            predictions.insert(date, value);
        }
        Ok(FilePredictor { predictions })
    }
}

impl Predictor for FilePredictor {
    fn name(&self) -> String {
        "file".into()
    }

    fn predict_next_open(&self, ctx: &DecisionContext<'_>) -> Result<f64, StrategyError> {
        self.predictions
            .get(&ctx.date)
            .copied()
            .ok_or(StrategyError::MissingPrediction(ctx.date))
    }
}

/// Trades on the sign of `predicted tomorrow - today's open`.
pub struct ForecasterStrategy<P: Predictor> {
    predictor: P,
}

impl<P: Predictor> ForecasterStrategy<P> {
    pub fn new(predictor: P) -> Self {
        ForecasterStrategy { predictor }
    }
}

impl<P: Predictor> Strategy for ForecasterStrategy<P> {
    fn id(&self) -> String {
        format!("forecaster({})", self.predictor.name())
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<TradeAction, StrategyError> {
        let predicted = self.predictor.predict_next_open(ctx)?;
        if !predicted.is_finite() || predicted <= 0.0 {
            return Err(StrategyError::InvalidPrediction {
                date: ctx.date,
                value: predicted,
            });
        }
        Ok(if predicted > ctx.today_open {
            full_buy()
        } else if predicted < ctx.today_open {
            full_sell()
        } else {
            TradeAction::HOLD
        })
    }
}

// ---------------------------------------------------------------------------
// Tuning
// ---------------------------------------------------------------------------

/// Metric maximized by the tuner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneMetric {
    TotalReturn,
    Sharpe,
}

impl TuneMetric {
    fn score(&self, m: &MetricsSummary) -> f64 {
        match self {
            TuneMetric::TotalReturn => m.total_return_pct,
            TuneMetric::Sharpe => m.sharpe,
        }
    }
}

impl std::str::FromStr for TuneMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "total_return" | "return" => Ok(TuneMetric::TotalReturn),
            "sharpe" => Ok(TuneMetric::Sharpe),
            other => Err(format!("unknown tuning metric `{other}`")),
        }
    }
}

/// Validation metrics for one evaluated spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneScore {
    pub spec: StrategySpec,
    pub metrics: MetricsSummary,
}

/// Everything the tuner evaluated plus the winning spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub grid: Vec<StrategySpec>,
    pub scores: Vec<TuneScore>,
    pub chosen: StrategySpec,
    pub selection_metric: TuneMetric,
}

/// True when `candidate` beats `best` under the metric with the documented
/// tie-break: higher metric, then higher Sharpe, then the lexicographically
/// smaller parameter vector.
fn beats(metric: TuneMetric, candidate: &TuneScore, best: &TuneScore) -> bool {
    let (c, b) = (
        metric.score(&candidate.metrics),
        metric.score(&best.metrics),
    );
    if c != b {
        return c > b;
    }
    if candidate.metrics.sharpe != best.metrics.sharpe {
        return candidate.metrics.sharpe > best.metrics.sharpe;
    }
    candidate.spec.param_vector() < best.spec.param_vector()
}

/// Evaluate every spec in `grid` on the validation split and pick the best.
pub fn tune(
    dataset: &Dataset,
    validation: &SplitSpec,
    grid: &[StrategySpec],
    fee: FeeModel,
    capital: f64,
    metric: TuneMetric,
) -> Result<TuneReport, StrategyError> {
    if grid.is_empty() {
        return Err(StrategyError::EmptyGrid);
    }
    let mut scores = Vec::with_capacity(grid.len());
    for spec in grid {
        let run = evaluate_spec(dataset, validation, spec, fee, capital)?;
        scores.push(TuneScore {
            spec: spec.clone(),
            metrics: run,
        });
    }
    let mut best = &scores[0];
    for candidate in &scores[1..] {
        if beats(metric, candidate, best) {
            best = candidate;
        }
    }
    Ok(TuneReport {
        grid: grid.to_vec(),
        scores: scores.clone(),
        chosen: best.spec.clone(),
        selection_metric: metric,
    })
}

fn evaluate_spec(
    dataset: &Dataset,
    split: &SplitSpec,
    spec: &StrategySpec,
    fee: FeeModel,
    capital: f64,
) -> Result<MetricsSummary, StrategyError> {
    let annotate = |reason: String| StrategyError::TuneRun {
        spec: spec.to_string(),
        reason,
    };
    let mut strategy = spec.build()?;
    let result: RunResult = run_backtest(dataset, split, strategy.as_mut(), fee, capital)
        .map_err(|e| annotate(e.to_string()))?;
    summarize(&result).map_err(|e| annotate(e.to_string()))
}

// ---------------------------------------------------------------------------
// Tuned-parameter cache
// ---------------------------------------------------------------------------

/// Chosen specs per asset and kind, persisted so test runs reuse validation
/// choices. Keys are asset tickers; inner keys are strategy kinds.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TunedParamsCache(pub BTreeMap<String, BTreeMap<String, StrategySpec>>);

impl TunedParamsCache {
    pub fn load(path: &Path) -> Result<Self, StrategyError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            StrategyError::Data(DataError::Io {
                path: path.display().to_string(),
                source: e,
            })
        })?;
        serde_json::from_str(&text).map_err(|e| {
            StrategyError::Data(DataError::MalformedRow {
                path: path.display().to_string(),
                line: 0,
                reason: e.to_string(),
            })
        })
    }

    pub fn store(&mut self, asset: &Asset, kind: &str, spec: StrategySpec) {
        self.0
            .entry(asset.to_string())
            .or_default()
            .insert(kind.to_string(), spec);
    }

    pub fn get(&self, asset: &Asset, kind: &str) -> Option<&StrategySpec> {
        self.0.get(&asset.to_string()).and_then(|m| m.get(kind))
    }

    pub fn save(&self, path: &Path) -> Result<(), StrategyError> {
        let text = serde_json::to_string_pretty(self).expect("cache serializes");
        std::fs::write(path, text).map_err(|e| {
            StrategyError::Data(DataError::Io {
                path: path.display().to_string(),
                source: e,
            })
        })
    }
}
