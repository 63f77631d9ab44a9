//! Python bindings: datasets, indicators, backtests, tuning, and the
//! mock-driven agent pipeline.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tradebench::agents::mock::MockBackend;
use tradebench::agents::{AblationConfig, AgentOptions, AgentStrategy};
use tradebench::dataio;
use tradebench::engine::{self, FeeModel, Strategy};
use tradebench::indicators;
use tradebench::metrics;
use tradebench::strategies;
use tradebench::synth;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_asset(ticker: &str) -> PyResult<dataio::Asset> {
    ticker.parse().map_err(value_err)
}

/// A loaded, immutable dataset (market series plus optional txn-stats and news).
#[pyclass]
struct Dataset {
    inner: dataio::Dataset,
}

#[pymethods]
impl Dataset {
    /// Load from a market CSV and optional txn-stats CSV / news JSONL.
    #[staticmethod]
    #[pyo3(signature = (market, txn_stats=None, news=None))]
    fn load(market: PathBuf, txn_stats: Option<PathBuf>, news: Option<PathBuf>) -> PyResult<Self> {
        let inner = dataio::Dataset::load(&market, txn_stats.as_deref(), news.as_deref())
            .map_err(value_err)?;
        Ok(Dataset { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.market().len()
    }

    /// (first_date, last_date) of the market series as ISO strings.
    fn date_range(&self) -> PyResult<(String, String)> {
        let market = self.inner.market();
        match (market.first(), market.last()) {
            (Some(a), Some(b)) => Ok((a.date.to_string(), b.date.to_string())),
            _ => Err(value_err("dataset is empty")),
        }
    }

    /// Open prices in date order.
    fn opens(&self) -> Vec<f64> {
        self.inner.market().iter().map(|d| d.open).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(days={}, txn_days={}, news_dates={})",
            self.inner.market().len(),
            self.inner.txn_stats().len(),
            self.inner.news().len()
        )
    }
}

/// One evaluation window: trading days [start, end), valued on `end`.
#[pyclass]
struct SplitSpec {
    inner: dataio::SplitSpec,
}

#[pymethods]
impl SplitSpec {
    #[new]
    fn new(asset: &str, name: &str, start: &str, end: &str) -> PyResult<Self> {
        let inner = dataio::SplitSpec::new(
            parse_asset(asset)?,
            name.parse().map_err(value_err)?,
            start.parse().map_err(|_| value_err("bad start date"))?,
            end.parse().map_err(|_| value_err("bad end date"))?,
        )
        .map_err(value_err)?;
        Ok(SplitSpec { inner })
    }

    #[getter]
    fn asset(&self) -> String {
        self.inner.asset.to_string()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.to_string()
    }

    #[getter]
    fn start(&self) -> String {
        self.inner.start.to_string()
    }

    #[getter]
    fn end(&self) -> String {
        self.inner.end.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "SplitSpec({} {} {}..{})",
            self.inner.asset, self.inner.name, self.inner.start, self.inner.end
        )
    }
}

/// The bundled default split table.
#[pyfunction]
fn default_splits() -> Vec<SplitSpec> {
    dataio::default_splits()
        .into_iter()
        .map(|inner| SplitSpec { inner })
        .collect()
}

/// A completed backtest with its metrics.
#[pyclass]
struct BacktestOutcome {
    result: engine::RunResult,
    summary: metrics::MetricsSummary,
    strategy_id: String,
    audit_jsonl: Option<String>,
}

#[pymethods]
impl BacktestOutcome {
    #[getter]
    fn strategy_id(&self) -> String {
        self.strategy_id.clone()
    }

    #[getter]
    fn total_return_pct(&self) -> f64 {
        self.summary.total_return_pct
    }

    #[getter]
    fn daily_return_mean_pct(&self) -> f64 {
        self.summary.daily_return_mean_pct
    }

    #[getter]
    fn daily_return_std_pct(&self) -> f64 {
        self.summary.daily_return_std_pct
    }

    #[getter]
    fn sharpe(&self) -> f64 {
        self.summary.sharpe
    }

    #[getter]
    fn final_net_worth(&self) -> f64 {
        self.result.final_net_worth
    }

    #[getter]
    fn start_net_worth(&self) -> f64 {
        self.result.start_net_worth
    }

    /// Per-day records as a JSON string.
    fn records_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.result.records).map_err(runtime_err)
    }

    /// The agent audit log as JSONL (agent runs only).
    fn audit_log_jsonl(&self) -> Option<String> {
        self.audit_jsonl.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "BacktestOutcome({} return={:.2}% sharpe={:.2})",
            self.strategy_id, self.summary.total_return_pct, self.summary.sharpe
        )
    }
}

fn run_with_strategy(
    dataset: &Dataset,
    split: &SplitSpec,
    strategy: &mut dyn engine::Strategy,
    fee: f64,
    capital: f64,
) -> PyResult<(engine::RunResult, metrics::MetricsSummary)> {
    let fee = FeeModel::new(fee).map_err(value_err)?;
    let result = engine::run_backtest(&dataset.inner, &split.inner, strategy, fee, capital)
        .map_err(runtime_err)?;
    let summary = metrics::summarize(&result).map_err(runtime_err)?;
    Ok((result, summary))
}

/// Run a classical strategy over a split.
///
/// `strategy` uses the CLI syntax, e.g. `"buy_and_hold"`, `"sma:window=10"`,
/// `"slma:short=5,long=20"`.
#[pyfunction]
#[pyo3(signature = (dataset, split, strategy, fee=0.0, capital=1_000_000.0))]
fn run_backtest(
    dataset: &Dataset,
    split: &SplitSpec,
    strategy: &str,
    fee: f64,
    capital: f64,
) -> PyResult<BacktestOutcome> {
    let spec = tradebench::cli::parse_strategy_arg(strategy).map_err(value_err)?;
    let mut built = spec.build().map_err(value_err)?;
    let (result, summary) = run_with_strategy(dataset, split, built.as_mut(), fee, capital)?;
    Ok(BacktestOutcome {
        result,
        summary,
        strategy_id: built.id(),
        audit_jsonl: None,
    })
}

/// Run the agent pipeline against a scripted mock backend: the k-th trading
/// day receives `actions[k]`.
#[pyfunction]
#[pyo3(signature = (dataset, split, actions, ablation="full", fee=0.0, capital=1_000_000.0))]
fn run_scripted_agent(
    dataset: &Dataset,
    split: &SplitSpec,
    actions: Vec<f64>,
    ablation: &str,
    fee: f64,
    capital: f64,
) -> PyResult<BacktestOutcome> {
    let ablation: AblationConfig = ablation.parse().map_err(value_err)?;
    let backend = Arc::new(MockBackend::scripted(actions));
    let mut agent = AgentStrategy::new(
        split.inner.asset.clone(),
        ablation,
        backend,
        AgentOptions::default(),
    );
    let (result, summary) = run_with_strategy(dataset, split, &mut agent, fee, capital)?;
    Ok(BacktestOutcome {
        result,
        summary,
        strategy_id: agent.id(),
        audit_jsonl: Some(agent.audit_log_jsonl()),
    })
}

/// Grid-tune a strategy kind on a split; returns the tune report as a dict
/// (via JSON).
#[pyfunction]
#[pyo3(signature = (dataset, split, kind, fee=0.0, capital=1_000_000.0, metric="total_return"))]
fn tune(
    py: Python<'_>,
    dataset: &Dataset,
    split: &SplitSpec,
    kind: &str,
    fee: f64,
    capital: f64,
    metric: &str,
) -> PyResult<Py<PyAny>> {
    let fee = FeeModel::new(fee).map_err(value_err)?;
    let metric: strategies::TuneMetric = metric.parse().map_err(value_err)?;
    let grid = strategies::default_grid(kind).map_err(value_err)?;
    let report = strategies::tune(&dataset.inner, &split.inner, &grid, fee, capital, metric)
        .map_err(runtime_err)?;
    let json = serde_json::to_string(&report).map_err(runtime_err)?;
    let loads = py.import("json")?.getattr("loads")?;
    Ok(loads.call1((json,))?.unbind())
}

/// Trailing simple moving average; None before the window fills.
#[pyfunction]
fn sma(values: Vec<f64>, window: usize) -> PyResult<Vec<Option<f64>>> {
    let series = indicators::PriceSeries::new(values).map_err(value_err)?;
    indicators::sma(&series, window).map_err(value_err)
}

/// Exponential moving average seeded from the first value.
#[pyfunction]
fn ema(values: Vec<f64>, window: usize) -> PyResult<Vec<f64>> {
    let series = indicators::PriceSeries::new(values).map_err(value_err)?;
    indicators::ema(&series, window).map_err(value_err)
}

/// MACD as (macd, signal, histogram) triples.
#[pyfunction]
#[pyo3(signature = (values, fast=12, slow=26, signal=9))]
fn macd(
    values: Vec<f64>,
    fast: usize,
    slow: usize,
    signal: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let series = indicators::PriceSeries::new(values).map_err(value_err)?;
    Ok(indicators::macd(&series, fast, slow, signal)
        .map_err(value_err)?
        .into_iter()
        .map(|p| (p.macd, p.signal, p.histogram))
        .collect())
}

/// Bollinger bands as (lower, middle, upper) triples; None before warmup.
#[pyfunction]
#[pyo3(signature = (values, window=20, multiplier=2.0))]
fn bollinger(
    values: Vec<f64>,
    window: usize,
    multiplier: f64,
) -> PyResult<Vec<Option<(f64, f64, f64)>>> {
    let series = indicators::PriceSeries::new(values).map_err(value_err)?;
    Ok(indicators::bollinger(&series, window, multiplier)
        .map_err(value_err)?
        .into_iter()
        .map(|p| p.map(|b| (b.lower, b.middle, b.upper)))
        .collect())
}

/// Extract the trade action from free-form model output.
#[pyfunction]
fn parse_action(response: &str) -> PyResult<f64> {
    tradebench::agents::parse::parse_action(response)
        .map(|a| a.fraction())
        .map_err(value_err)
}

/// Write the synthetic sample data set; returns the written file paths.
#[pyfunction]
#[pyo3(signature = (dir, assets=None))]
fn write_sample_data(dir: PathBuf, assets: Option<Vec<String>>) -> PyResult<Vec<String>> {
    let assets = match assets {
        None => vec![dataio::Asset::Btc, dataio::Asset::Eth, dataio::Asset::Sol],
        Some(tickers) => tickers
            .iter()
            .map(|t| parse_asset(t))
            .collect::<PyResult<Vec<_>>>()?,
    };
    let files = synth::write_sample_data(Path::new(&dir), &assets).map_err(runtime_err)?;
    let mut out: Vec<String> = Vec::new();
    for f in files {
        out.push(f.market.display().to_string());
        out.push(f.txn_stats.display().to_string());
        out.push(f.news.display().to_string());
    }
    out.push(dir.join("splits.csv").display().to_string());
    Ok(out)
}

/// The bundled reference quotes: list of (asset, split, start, end,
/// start_open, end_close, trend_pct).
#[pyfunction]
fn reference_splits() -> Vec<(String, String, String, String, f64, f64, f64)> {
    dataio::reference_splits()
        .into_iter()
        .map(|q| {
            (
                q.split.asset.to_string(),
                q.split.name.to_string(),
                q.split.start.to_string(),
                q.split.end.to_string(),
                q.start_open,
                q.end_close,
                q.trend_pct,
            )
        })
        .collect()
}

#[pymodule]
fn tradebench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Dataset>()?;
    m.add_class::<SplitSpec>()?;
    m.add_class::<BacktestOutcome>()?;
    m.add_function(wrap_pyfunction!(default_splits, m)?)?;
    m.add_function(wrap_pyfunction!(reference_splits, m)?)?;
    m.add_function(wrap_pyfunction!(run_backtest, m)?)?;
    m.add_function(wrap_pyfunction!(run_scripted_agent, m)?)?;
    m.add_function(wrap_pyfunction!(tune, m)?)?;
    m.add_function(wrap_pyfunction!(sma, m)?)?;
    m.add_function(wrap_pyfunction!(ema, m)?)?;
    m.add_function(wrap_pyfunction!(macd, m)?)?;
    m.add_function(wrap_pyfunction!(bollinger, m)?)?;
    m.add_function(wrap_pyfunction!(parse_action, m)?)?;
    m.add_function(wrap_pyfunction!(write_sample_data, m)?)?;
    Ok(())
}
