//! Loading, validation, and slicing of market, on-chain, and news data.
//!
//! File formats:
//! - market CSV: header `date,open,high,low,close,volume,market_cap`
//! - txn-stats CSV: header
//!   `date,num_transactions,active_wallets,total_value_transferred,avg_gas_price,total_gas_consumed`
//! - news JSONL: one object per line with keys `date`, `source`, `title`,
//!   `text` and optional `url`
//!
//! Dates are ISO-8601 (UTC calendar days), decimals use `.`, encoding is
//! UTF-8. Lines starting with `#` are treated as comments in both CSV formats
//! (used e.g. to document the native unit of `total_value_transferred`).
//! Loading is pure: a loaded [`Dataset`] is immutable and safe to share.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MARKET_CSV_HEADER: &str = "date,open,high,low,close,volume,market_cap";
pub const TXN_STATS_CSV_HEADER: &str =
    "date,num_transactions,active_wallets,total_value_transferred,avg_gas_price,total_gas_consumed";
pub const SPLIT_CSV_HEADER: &str = "asset,name,start,end";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: header mismatch: expected `{expected}`")]
    HeaderMismatch {
        path: String,
        expected: &'static str,
    },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow {
        path: String,
        line: u64,
        reason: String,
    },
    #[error("{path}:{line}: field `{field}` {reason} (got {value})")]
    InvalidField {
        path: String,
        line: u64,
        field: &'static str,
        reason: &'static str,
        value: String,
    },
    #[error("{path}:{line}: duplicate date {date}")]
    DuplicateDate {
        path: String,
        line: u64,
        date: NaiveDate,
    },
    #[error("market series not strictly increasing by date at {date}")]
    UnsortedMarket { date: NaiveDate },
    #[error("{kind} entry dated {date} lies after the market series (ends {market_end})")]
    OutsideMarketRange {
        kind: &'static str,
        date: NaiveDate,
        market_end: NaiveDate,
    },
    #[error("split `{0}` is invalid: start must precede end")]
    InvalidSplit(String),
    #[error("market series is missing {date} inside the requested split")]
    MissingDay { date: NaiveDate },
    #[error("split end {date} is not present in the market series")]
    EndNotPresent { date: NaiveDate },
    #[error("unknown asset `{0}`")]
    UnknownAsset(String),
}

impl DataError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One day of OHLCV plus market cap for a single asset. Prices and sizes are
/// in USD; all values are finite and positive, with `low <= min(open, close)`
/// and `high >= max(open, close)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketDay {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
    pub market_cap: f64,
}

impl MarketDay {
    fn check(&self, path: &str, line: u64) -> Result<(), DataError> {
        let fields = [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
            ("volume", self.volume),
            ("market_cap", self.market_cap),
        ];
        for (field, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(DataError::InvalidField {
                    path: path.to_string(),
                    line,
                    field,
                    reason: "must be finite and positive",
                    value: value.to_string(),
                });
            }
        }
        if self.low > self.open.min(self.close) {
            return Err(DataError::InvalidField {
                path: path.to_string(),
                line,
                field: "low",
                reason: "must not exceed min(open, close)",
                value: self.low.to_string(),
            });
        }
        if self.high < self.open.max(self.close) {
            return Err(DataError::InvalidField {
                path: path.to_string(),
                line,
                field: "high",
                reason: "must not be below max(open, close)",
                value: self.high.to_string(),
            });
        }
        Ok(())
    }
}

/// Daily on-chain transaction statistics. Counts are whole numbers; the
/// remaining quantities are in native token / gas units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxnStatsDay {
    pub date: NaiveDate,
    pub num_transactions: u64,
    pub active_wallets: u64,
    pub total_value_transferred: f64,
    pub avg_gas_price: f64,
    pub total_gas_consumed: f64,
}

/// One news article (or pre-made summary) dated to a UTC calendar day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsItem {
    pub date: NaiveDate,
    pub source: String,
    pub title: String,
    #[serde(rename = "text")]
    pub body_or_summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

/// Supported assets. `Other` carries an arbitrary upper-cased ticker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Asset {
    Btc,
    Eth,
    Sol,
    Other(String),
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Asset::Btc => write!(f, "BTC"),
            Asset::Eth => write!(f, "ETH"),
            Asset::Sol => write!(f, "SOL"),
            Asset::Other(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for Asset {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_uppercase();
        match t.as_str() {
            "BTC" => Ok(Asset::Btc),
            "ETH" => Ok(Asset::Eth),
            "SOL" => Ok(Asset::Sol),
            "" => Err(DataError::UnknownAsset(s.to_string())),
            _ => Ok(Asset::Other(t)),
        }
    }
}

impl From<Asset> for String {
    fn from(a: Asset) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Asset {
    type Error = DataError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Named evaluation window.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SplitName {
    Validation,
    Bearish,
    Sideways,
    Bullish,
    Custom(String),
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitName::Validation => write!(f, "validation"),
            SplitName::Bearish => write!(f, "bearish"),
            SplitName::Sideways => write!(f, "sideways"),
            SplitName::Bullish => write!(f, "bullish"),
            SplitName::Custom(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for SplitName {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_lowercase().as_str() {
            "validation" => SplitName::Validation,
            "bearish" => SplitName::Bearish,
            "sideways" => SplitName::Sideways,
            "bullish" => SplitName::Bullish,
            "" => return Err(DataError::InvalidSplit("empty split name".into())),
            other => SplitName::Custom(other.to_string()),
        })
    }
}

impl From<SplitName> for String {
    fn from(n: SplitName) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for SplitName {
    type Error = DataError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// An evaluation window: transaction days cover `[start, end)`, and the run
/// is valued on `end` (which must also be present in the market series).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitSpec {
    pub asset: Asset,
    pub name: SplitName,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl SplitSpec {
    pub fn new(
        asset: Asset,
        name: SplitName,
        start: NaiveDate,
        end: NaiveDate,
    ) -> Result<Self, DataError> {
        if start >= end {
            return Err(DataError::InvalidSplit(format!("{asset}/{name}")));
        }
        Ok(SplitSpec {
            asset,
            name,
            start,
            end,
        })
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.asset, self.name)
    }
}

/// Date-aligned market data with optional on-chain stats and news.
///
/// `market` is strictly increasing by date with no duplicates; txn-stats and
/// news entries never post-date the market series.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Dataset {
    market: Vec<MarketDay>,
    txn_stats: Vec<TxnStatsDay>,
    news: BTreeMap<NaiveDate, Vec<NewsItem>>,
}

impl Dataset {
    pub fn new(market: Vec<MarketDay>) -> Result<Self, DataError> {
        for pair in market.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(DataError::UnsortedMarket { date: pair[1].date });
            }
        }
        Ok(Dataset {
            market,
            txn_stats: Vec::new(),
            news: BTreeMap::new(),
        })
    }

    pub fn with_txn_stats(mut self, txn_stats: Vec<TxnStatsDay>) -> Result<Self, DataError> {
        if let (Some(last), Some(market_end)) = (txn_stats.last(), self.market.last()) {
            if last.date > market_end.date {
                return Err(DataError::OutsideMarketRange {
                    kind: "txn-stats",
                    date: last.date,
                    market_end: market_end.date,
                });
            }
        }
        self.txn_stats = txn_stats;
        Ok(self)
    }

    pub fn with_news(
        mut self,
        news: BTreeMap<NaiveDate, Vec<NewsItem>>,
    ) -> Result<Self, DataError> {
        if let (Some((date, _)), Some(market_end)) = (news.iter().next_back(), self.market.last()) {
            if *date > market_end.date {
                return Err(DataError::OutsideMarketRange {
                    kind: "news",
                    date: *date,
                    market_end: market_end.date,
                });
            }
        }
        self.news = news;
        Ok(self)
    }

    /// Load a dataset from a market CSV plus optional txn-stats CSV and news JSONL.
    pub fn load(
        market_path: &Path,
        txn_stats_path: Option<&Path>,
        news_path: Option<&Path>,
    ) -> Result<Self, DataError> {
        let mut ds = Dataset::new(load_market_csv(market_path)?)?;
        if let Some(p) = txn_stats_path {
            ds = ds.with_txn_stats(load_txn_stats_csv(p)?)?;
        }
        if let Some(p) = news_path {
            ds = ds.with_news(load_news_jsonl(p)?)?;
        }
        Ok(ds)
    }

    pub fn market(&self) -> &[MarketDay] {
        &self.market
    }

    pub fn txn_stats(&self) -> &[TxnStatsDay] {
        &self.txn_stats
    }

    pub fn news(&self) -> &BTreeMap<NaiveDate, Vec<NewsItem>> {
        &self.news
    }
}

// ---------------------------------------------------------------------------
// Loaders and canonical serializers
// ---------------------------------------------------------------------------

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>, DataError> {
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file))
}

fn check_header(
    reader: &mut csv::Reader<fs::File>,
    path: &Path,
    expected: &'static str,
) -> Result<(), DataError> {
    let mismatch = || DataError::HeaderMismatch {
        path: path.display().to_string(),
        expected,
    };
    let headers = reader.headers().map_err(|_| mismatch())?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected.split(',').collect::<Vec<_>>() {
        return Err(mismatch());
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_f64(
    record: &csv::StringRecord,
    idx: usize,
    field: &'static str,
    path: &str,
) -> Result<f64, DataError> {
    let line = record_line(record);
    let raw = record.get(idx).ok_or_else(|| DataError::MalformedRow {
        path: path.to_string(),
        line,
        reason: format!("missing column `{field}`"),
    })?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| DataError::InvalidField {
            path: path.to_string(),
            line,
            field,
            reason: "is not a number",
            value: raw.to_string(),
        })
}

fn parse_count(
    record: &csv::StringRecord,
    idx: usize,
    field: &'static str,
    path: &str,
) -> Result<u64, DataError> {
    let line = record_line(record);
    let raw = record.get(idx).ok_or_else(|| DataError::MalformedRow {
        path: path.to_string(),
        line,
        reason: format!("missing column `{field}`"),
    })?;
    let n: i64 = raw.trim().parse().map_err(|_| DataError::InvalidField {
        path: path.to_string(),
        line,
        field,
        reason: "is not an integer count",
        value: raw.to_string(),
    })?;
    u64::try_from(n).map_err(|_| DataError::InvalidField {
        path: path.to_string(),
        line,
        field,
        reason: "must be non-negative",
        value: raw.to_string(),
    })
}

fn parse_date(record: &csv::StringRecord, idx: usize, path: &str) -> Result<NaiveDate, DataError> {
    let line = record_line(record);
    let raw = record.get(idx).ok_or_else(|| DataError::MalformedRow {
        path: path.to_string(),
        line,
        reason: "missing column `date`".to_string(),
    })?;
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d").map_err(|_| DataError::InvalidField {
        path: path.to_string(),
        line,
        field: "date",
        reason: "is not an ISO-8601 date",
        value: raw.to_string(),
    })
}

/// Load a market CSV into a validated, date-sorted series.
///
/// Input row order does not matter; duplicate dates are rejected.
pub fn load_market_csv(path: &Path) -> Result<Vec<MarketDay>, DataError> {
    let path_str = path.display().to_string();
    let mut reader = csv_reader(path)?;
    check_header(&mut reader, path, MARKET_CSV_HEADER)?;

    let mut days = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::MalformedRow {
            path: path_str.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record_line(&record);
        let day = MarketDay {
            date: parse_date(&record, 0, &path_str)?,
            open: parse_f64(&record, 1, "open", &path_str)?,
            high: parse_f64(&record, 2, "high", &path_str)?,
            low: parse_f64(&record, 3, "low", &path_str)?,
            close: parse_f64(&record, 4, "close", &path_str)?,
            volume: parse_f64(&record, 5, "volume", &path_str)?,
            market_cap: parse_f64(&record, 6, "market_cap", &path_str)?,
        };
        day.check(&path_str, line)?;
        if seen.insert(day.date, line).is_some() {
            return Err(DataError::DuplicateDate {
                path: path_str,
                line,
                date: day.date,
            });
        }
        days.push(day);
    }
    days.sort_by_key(|d| d.date);
    Ok(days)
}

/// Load a txn-stats CSV into a validated, date-sorted series.
pub fn load_txn_stats_csv(path: &Path) -> Result<Vec<TxnStatsDay>, DataError> {
    let path_str = path.display().to_string();
    let mut reader = csv_reader(path)?;
    check_header(&mut reader, path, TXN_STATS_CSV_HEADER)?;

    let mut days = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::MalformedRow {
            path: path_str.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record_line(&record);
        let day = TxnStatsDay {
            date: parse_date(&record, 0, &path_str)?,
            num_transactions: parse_count(&record, 1, "num_transactions", &path_str)?,
            active_wallets: parse_count(&record, 2, "active_wallets", &path_str)?,
            total_value_transferred: parse_f64(&record, 3, "total_value_transferred", &path_str)?,
            avg_gas_price: parse_f64(&record, 4, "avg_gas_price", &path_str)?,
            total_gas_consumed: parse_f64(&record, 5, "total_gas_consumed", &path_str)?,
        };
        for (field, value) in [
            ("total_value_transferred", day.total_value_transferred),
            ("avg_gas_price", day.avg_gas_price),
            ("total_gas_consumed", day.total_gas_consumed),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(DataError::InvalidField {
                    path: path_str,
                    line,
                    field,
                    reason: "must be finite and non-negative",
                    value: value.to_string(),
                });
            }
        }
        if seen.insert(day.date, line).is_some() {
            return Err(DataError::DuplicateDate {
                path: path_str,
                line,
                date: day.date,
            });
        }
        days.push(day);
    }
    days.sort_by_key(|d| d.date);
    Ok(days)
}

/// Load a news JSONL file into a date-keyed multimap, preserving file order
/// within each date.
pub fn load_news_jsonl(path: &Path) -> Result<BTreeMap<NaiveDate, Vec<NewsItem>>, DataError> {
    let path_str = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let mut map: BTreeMap<NaiveDate, Vec<NewsItem>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = (i + 1) as u64;
        if raw.trim().is_empty() {
            continue;
        }
        let item: NewsItem = serde_json::from_str(raw).map_err(|e| DataError::MalformedRow {
            path: path_str.clone(),
            line,
            reason: e.to_string(),
        })?;
        for (field, value) in [("title", &item.title), ("text", &item.body_or_summary)] {
            if value.trim().is_empty() {
                return Err(DataError::InvalidField {
                    path: path_str,
                    line,
                    field,
                    reason: "must be non-empty",
                    value: String::new(),
                });
            }
        }
        map.entry(item.date).or_default().push(item);
    }
    Ok(map)
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips; canonical form for files.
    format!("{v}")
}

/// Canonical CSV form of a market series; `load` of the output reproduces the
/// input series exactly.
pub fn market_to_csv(days: &[MarketDay]) -> String {
    let mut out = String::from(MARKET_CSV_HEADER);
    out.push('\n');
    for d in days {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.date,
            fmt_f64(d.open),
            fmt_f64(d.high),
            fmt_f64(d.low),
            fmt_f64(d.close),
            fmt_f64(d.volume),
            fmt_f64(d.market_cap)
        ));
    }
    out
}

/// Canonical CSV form of a txn-stats series.
pub fn txn_stats_to_csv(days: &[TxnStatsDay]) -> String {
    let mut out = String::from(TXN_STATS_CSV_HEADER);
    out.push('\n');
    for d in days {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.date,
            d.num_transactions,
            d.active_wallets,
            fmt_f64(d.total_value_transferred),
            fmt_f64(d.avg_gas_price),
            fmt_f64(d.total_gas_consumed)
        ));
    }
    out
}

/// Canonical JSONL form of a news map (dates ascending, file order within a date).
pub fn news_to_jsonl(news: &BTreeMap<NaiveDate, Vec<NewsItem>>) -> String {
    let mut out = String::new();
    for items in news.values() {
        for item in items {
            out.push_str(&serde_json::to_string(item).expect("news serializes"));
            out.push('\n');
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// A bundled evaluation window together with its endpoint reference prices
/// and the price trend over the window (close-at-end vs open-at-start).
#[derive(Debug, Clone)]
pub struct SplitQuote {
    pub split: SplitSpec,
    pub start_open: f64,
    pub end_close: f64,
    pub trend_pct: f64,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// The twelve bundled evaluation windows (validation plus bearish, sideways
/// and bullish test windows per asset) with their endpoint reference prices.
pub fn reference_splits() -> Vec<SplitQuote> {
    use Asset::*;
    use SplitName::*;
    let rows: [(Asset, SplitName, NaiveDate, NaiveDate, f64, f64, f64); 12] = [
        (
            Btc,
            Validation,
            date(2023, 1, 19),
            date(2023, 3, 13),
            20977.48,
            20628.03,
            -1.67,
        ),
        (
            Btc,
            Bearish,
            date(2023, 4, 12),
            date(2023, 6, 16),
            30462.48,
            25575.28,
            -15.61,
        ),
        (
            Btc,
            Sideways,
            date(2023, 6, 17),
            date(2023, 8, 25),
            26328.68,
            26163.68,
            -0.83,
        ),
        (
            Btc,
            Bullish,
            date(2023, 10, 1),
            date(2023, 12, 1),
            26967.40,
            37718.01,
            39.66,
        ),
        (
            Eth,
            Validation,
            date(2023, 1, 13),
            date(2023, 3, 12),
            1417.13,
            1429.60,
            0.88,
        ),
        (
            Eth,
            Bearish,
            date(2023, 4, 12),
            date(2023, 6, 16),
            1892.94,
            1664.98,
            -12.24,
        ),
        (
            Eth,
            Sideways,
            date(2023, 6, 20),
            date(2023, 8, 31),
            1734.79,
            1705.11,
            -1.91,
        ),
        (
            Eth,
            Bullish,
            date(2023, 10, 1),
            date(2023, 12, 1),
            1671.00,
            2051.76,
            22.59,
        ),
        (
            Sol,
            Validation,
            date(2023, 1, 14),
            date(2023, 3, 12),
            18.29,
            18.24,
            -0.27,
        ),
        (
            Sol,
            Bearish,
            date(2023, 4, 12),
            date(2023, 6, 16),
            23.02,
            14.76,
            -36.08,
        ),
        (
            Sol,
            Sideways,
            date(2023, 7, 8),
            date(2023, 8, 31),
            21.49,
            20.83,
            -3.23,
        ),
        (
            Sol,
            Bullish,
            date(2023, 10, 1),
            date(2023, 12, 1),
            21.39,
            59.25,
            176.72,
        ),
    ];
    rows.into_iter()
        .map(
            |(asset, name, start, end, start_open, end_close, trend_pct)| SplitQuote {
                split: SplitSpec {
                    asset,
                    name,
                    start,
                    end,
                },
                start_open,
                end_close,
                trend_pct,
            },
        )
        .collect()
}

/// The default split table (dates only).
pub fn default_splits() -> Vec<SplitSpec> {
    reference_splits().into_iter().map(|q| q.split).collect()
}

/// Look up a split by asset and name, from a custom table or the defaults.
pub fn find_split(splits: &[SplitSpec], asset: &Asset, name: &SplitName) -> Option<SplitSpec> {
    splits
        .iter()
        .find(|s| &s.asset == asset && &s.name == name)
        .cloned()
}

/// Load a split table from CSV (`asset,name,start,end`).
pub fn load_split_config(path: &Path) -> Result<Vec<SplitSpec>, DataError> {
    let path_str = path.display().to_string();
    let mut reader = csv_reader(path)?;
    check_header(&mut reader, path, SPLIT_CSV_HEADER)?;
    let mut splits = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::MalformedRow {
            path: path_str.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = record_line(&record);
        let get = |idx: usize, field: &'static str| {
            record
                .get(idx)
                .map(str::trim)
                .ok_or_else(|| DataError::MalformedRow {
                    path: path_str.clone(),
                    line,
                    reason: format!("missing column `{field}`"),
                })
        };
        let asset: Asset = get(0, "asset")?.parse()?;
        let name: SplitName = get(1, "name")?.parse()?;
        let start = parse_date(&record, 2, &path_str)?;
        let end = parse_date(&record, 3, &path_str)?;
        splits.push(SplitSpec::new(asset, name, start, end)?);
    }
    Ok(splits)
}

/// Canonical CSV form of a split table.
pub fn split_config_to_csv(splits: &[SplitSpec]) -> String {
    let mut out = String::from(SPLIT_CSV_HEADER);
    out.push('\n');
    for s in splits {
        out.push_str(&format!("{},{},{},{}\n", s.asset, s.name, s.start, s.end));
    }
    out
}

/// Slice a split out of a dataset: the trading days `[start, end)` plus the
/// valuation day `end`. Every calendar day in `[start, end]` must be present.
pub fn slice_split<'a>(
    dataset: &'a Dataset,
    split: &SplitSpec,
) -> Result<(&'a [MarketDay], &'a MarketDay), DataError> {
    let market = dataset.market();
    let start_idx = market
        .binary_search_by_key(&split.start, |d| d.date)
        .map_err(|_| DataError::MissingDay { date: split.start })?;

    let n_days = (split.end - split.start).num_days();
    debug_assert!(n_days > 0, "SplitSpec::new enforces start < end");
    let end_idx = start_idx + n_days as usize;
    if end_idx >= market.len() {
        // Distinguish a missing interior day from a series that ends early.
        for offset in 1..=n_days {
            let expected = split.start + chrono::Days::new(offset as u64);
            let idx = start_idx + offset as usize;
            match market.get(idx) {
                Some(day) if day.date == expected => continue,
                Some(_) => return Err(DataError::MissingDay { date: expected }),
                None => return Err(DataError::EndNotPresent { date: split.end }),
            }
        }
        unreachable!("end_idx out of bounds implies a gap or early end");
    }
    for offset in 1..=n_days {
        let expected = split.start + chrono::Days::new(offset as u64);
        if market[start_idx + offset as usize].date != expected {
            return Err(DataError::MissingDay { date: expected });
        }
    }
    Ok((&market[start_idx..end_idx], &market[end_idx]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::NamedTempFile;

    fn write_temp(contents: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn day(date_str: &str, open: f64) -> MarketDay {
        MarketDay {
            date: date_str.parse().unwrap(),
            open,
            high: open * 1.01,
            low: open * 0.99,
            close: open,
            volume: 1.0e9,
            market_cap: 1.0e11,
        }
    }

    #[test]
    fn market_csv_round_trip_is_identity() {
        let days = vec![day("2023-10-01", 1671.0), day("2023-10-02", 1680.25)];
        let csv_text = market_to_csv(&days);
        let f = write_temp(&csv_text);
        let loaded = load_market_csv(f.path()).unwrap();
        assert_eq!(loaded, days);
        assert_eq!(market_to_csv(&loaded), csv_text);
    }

    #[test]
    fn market_csv_empty_file_gives_empty_series() {
        let f = write_temp("date,open,high,low,close,volume,market_cap\n");
        assert!(load_market_csv(f.path()).unwrap().is_empty());
    }

    #[test]
    fn market_csv_rows_out_of_order_load_sorted() {
        let sorted = vec![
            day("2023-10-01", 100.0),
            day("2023-10-02", 101.0),
            day("2023-10-03", 102.0),
        ];
        let mut shuffled = sorted.clone();
        shuffled.swap(0, 2);
        let f = write_temp(&market_to_csv(&shuffled));
        assert_eq!(load_market_csv(f.path()).unwrap(), sorted);
    }

    #[test]
    fn market_csv_rejects_duplicate_date() {
        let days = vec![day("2023-10-01", 100.0), day("2023-10-01", 101.0)];
        let f = write_temp(&market_to_csv(&days));
        match load_market_csv(f.path()) {
            Err(DataError::DuplicateDate { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected duplicate-date error, got {other:?}"),
        }
    }

    #[test]
    fn market_csv_rejects_non_positive_price() {
        let f =
            write_temp("date,open,high,low,close,volume,market_cap\n2023-10-01,0,1,0.5,1,1,1\n");
        match load_market_csv(f.path()) {
            Err(DataError::InvalidField { field, line, .. }) => {
                assert_eq!(field, "open");
                assert_eq!(line, 2);
            }
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn market_csv_rejects_bad_header() {
        let f = write_temp("date,open\n2023-10-01,1\n");
        assert!(matches!(
            load_market_csv(f.path()),
            Err(DataError::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn market_csv_rejects_ohlc_inconsistency() {
        // high below the close
        let f = write_temp(
            "date,open,high,low,close,volume,market_cap\n2023-10-01,100,100,99,101,1,1\n",
        );
        match load_market_csv(f.path()) {
            Err(DataError::InvalidField { field, .. }) => assert_eq!(field, "high"),
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn txn_stats_round_trip_and_validation() {
        let text = "date,num_transactions,active_wallets,total_value_transferred,avg_gas_price,total_gas_consumed\n\
                    2023-10-01,1000000,400000,2500000,12.3,110000000000\n";
        let f = write_temp(text);
        let days = load_txn_stats_csv(f.path()).unwrap();
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].num_transactions, 1_000_000);
        assert_eq!(days[0].total_gas_consumed, 1.1e11);
        assert_eq!(txn_stats_to_csv(&days), text);
    }

    #[test]
    fn txn_stats_rejects_negative_count() {
        let text = "date,num_transactions,active_wallets,total_value_transferred,avg_gas_price,total_gas_consumed\n\
                    2023-10-01,1000,-1,1,1,1\n";
        let f = write_temp(text);
        match load_txn_stats_csv(f.path()) {
            Err(DataError::InvalidField { field, line, .. }) => {
                assert_eq!(field, "active_wallets");
                assert_eq!(line, 2);
            }
            other => panic!("expected field error, got {other:?}"),
        }
    }

    #[test]
    fn txn_stats_empty_file_ok() {
        let f = write_temp(&format!("{TXN_STATS_CSV_HEADER}\n"));
        assert!(load_txn_stats_csv(f.path()).unwrap().is_empty());
    }

    #[test]
    fn txn_stats_allows_unit_comment() {
        let text = format!(
            "# total_value_transferred is in ETH\n{TXN_STATS_CSV_HEADER}\n2023-10-01,1,1,1,1,1\n"
        );
        let f = write_temp(&text);
        assert_eq!(load_txn_stats_csv(f.path()).unwrap().len(), 1);
    }

    #[test]
    fn news_jsonl_loads_and_groups_by_date() {
        let text = concat!(
            r#"{"date":"2024-01-10","source":"crypto.news","title":"ETF rumor","text":"Speculation grows."}"#,
            "\n",
            r#"{"date":"2024-01-11","source":"bloomberg","title":"ETF approved","text":"It happened.","url":"https://example.com/etf"}"#,
            "\n"
        );
        let f = write_temp(text);
        let news = load_news_jsonl(f.path()).unwrap();
        assert_eq!(news.len(), 2);
        assert_eq!(news_to_jsonl(&news), text);
    }

    #[test]
    fn news_jsonl_empty_file_gives_empty_map() {
        let f = write_temp("");
        assert!(load_news_jsonl(f.path()).unwrap().is_empty());
    }

    #[test]
    fn news_jsonl_duplicate_dates_keep_file_order() {
        let text = concat!(
            r#"{"date":"2024-01-10","source":"a","title":"first","text":"x"}"#,
            "\n",
            r#"{"date":"2024-01-10","source":"b","title":"second","text":"y"}"#,
            "\n"
        );
        let f = write_temp(text);
        let news = load_news_jsonl(f.path()).unwrap();
        let items = &news[&"2024-01-10".parse::<NaiveDate>().unwrap()];
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].title, "first");
        assert_eq!(items[1].title, "second");
    }

    #[test]
    fn news_jsonl_rejects_missing_title() {
        let f = write_temp(r#"{"date":"2024-01-10","source":"a","text":"x"}"#);
        assert!(matches!(
            load_news_jsonl(f.path()),
            Err(DataError::MalformedRow { line: 1, .. })
        ));
    }

    fn contiguous_market(start: &str, n: usize) -> Vec<MarketDay> {
        let start: NaiveDate = start.parse().unwrap();
        (0..n)
            .map(|i| {
                day(
                    &(start + chrono::Days::new(i as u64)).to_string(),
                    100.0 + i as f64,
                )
            })
            .collect()
    }

    #[test]
    fn slice_split_validation_window_has_53_trading_days() {
        // Calendar oracle: 13 days left in January + 28 in February + 12 in March.
        let ds = Dataset::new(contiguous_market("2023-01-10", 80)).unwrap();
        let split = SplitSpec::new(
            Asset::Btc,
            SplitName::Validation,
            date(2023, 1, 19),
            date(2023, 3, 13),
        )
        .unwrap();
        let (days, valuation) = slice_split(&ds, &split).unwrap();
        assert_eq!(days.len(), 13 + 28 + 12);
        assert_eq!(days.first().unwrap().date, split.start);
        assert_eq!(valuation.date, split.end);
    }

    #[test]
    fn slice_split_minimal_window() {
        let ds = Dataset::new(contiguous_market("2023-01-01", 3)).unwrap();
        let split = SplitSpec::new(
            Asset::Eth,
            SplitName::Custom("one".into()),
            date(2023, 1, 1),
            date(2023, 1, 2),
        )
        .unwrap();
        let (days, valuation) = slice_split(&ds, &split).unwrap();
        assert_eq!(days.len(), 1);
        assert_eq!(valuation.date, date(2023, 1, 2));
    }

    #[test]
    fn slice_split_end_beyond_data_errors() {
        let ds = Dataset::new(contiguous_market("2023-01-01", 5)).unwrap();
        let split = SplitSpec::new(
            Asset::Eth,
            SplitName::Bullish,
            date(2023, 1, 2),
            date(2023, 1, 9),
        )
        .unwrap();
        assert!(matches!(
            slice_split(&ds, &split),
            Err(DataError::EndNotPresent { .. })
        ));
    }

    #[test]
    fn slice_split_gap_errors() {
        let mut market = contiguous_market("2023-01-01", 6);
        market.remove(3); // drop 2023-01-04
        let ds = Dataset::new(market).unwrap();
        let split = SplitSpec::new(
            Asset::Eth,
            SplitName::Bullish,
            date(2023, 1, 1),
            date(2023, 1, 6),
        )
        .unwrap();
        match slice_split(&ds, &split) {
            Err(DataError::MissingDay { date: d }) => assert_eq!(d, date(2023, 1, 4)),
            other => panic!("expected missing-day error, got {other:?}"),
        }
    }

    #[test]
    fn default_split_table_has_twelve_rows() {
        let splits = default_splits();
        assert_eq!(splits.len(), 12);
        for s in &splits {
            assert!(s.start < s.end);
        }
        let csv_text = split_config_to_csv(&splits);
        let f = write_temp(&csv_text);
        assert_eq!(load_split_config(f.path()).unwrap(), splits);
    }

    #[test]
    fn dataset_rejects_news_after_market_end() {
        let ds = Dataset::new(contiguous_market("2023-01-01", 3)).unwrap();
        let mut news = BTreeMap::new();
        news.insert(
            date(2023, 2, 1),
            vec![NewsItem {
                date: date(2023, 2, 1),
                source: "a".into(),
                title: "t".into(),
                body_or_summary: "b".into(),
                url: None,
            }],
        );
        assert!(matches!(
            ds.with_news(news),
            Err(DataError::OutsideMarketRange { .. })
        ));
    }
}
