//! Deterministic synthetic data anchored to the bundled evaluation windows.
//!
//! Live data collection is out of scope, so tests and demos run on generated
//! series whose endpoint prices match the bundled reference quotes exactly:
//! each window's start-date open equals the reference open, and its end-date
//! open and close both equal the reference close (a flat final day), so
//! zero-fee buy-and-hold reproduces the reference trend. Between anchors
//! prices follow log-linear interpolation with a small hash-driven wiggle
//! that vanishes at the anchors. Everything is a pure function of the asset
//! and date — no RNG state, identical output on every call.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};

use crate::dataio::{
    market_to_csv, news_to_jsonl, reference_splits, split_config_to_csv, txn_stats_to_csv, Asset,
    MarketDay, NewsItem, TxnStatsDay,
};

/// Warmup days generated before the first anchor of each asset.
const WARMUP_DAYS: u64 = 45;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn asset_tag(asset: &Asset) -> u64 {
    asset
        .to_string()
        .bytes()
        .fold(0xcbf29ce484222325, |h, b| splitmix64(h ^ b as u64))
}

/// Deterministic noise in [-1, 1) keyed by asset, date, and a salt.
fn unit_noise(tag: u64, date: NaiveDate, salt: u64) -> f64 {
    let days = date.num_days_from_ce() as u64;
    let h = splitmix64(tag ^ splitmix64(days ^ splitmix64(salt)));
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Price anchors for one asset: (date, open value) pairs, strictly ascending.
fn anchors(asset: &Asset) -> Vec<(NaiveDate, f64)> {
    let mut points: Vec<(NaiveDate, f64)> = Vec::new();
    for quote in reference_splits() {
        if &quote.split.asset != asset {
            continue;
        }
        points.push((quote.split.start, quote.start_open));
        points.push((quote.split.end, quote.end_close));
    }
    points.sort_by_key(|(d, _)| *d);
    points.dedup_by_key(|(d, _)| *d);
    let first = points[0];
    // Flat-ish warmup segment so indicator windows can fill before the
    // earliest window starts.
    points.insert(0, (first.0 - chrono::Days::new(WARMUP_DAYS), first.1));
    points
}

/// The open price on `date`, log-linearly interpolated between anchors with
/// a wiggle that is exactly zero on anchor dates.
fn open_price(tag: u64, anchor_points: &[(NaiveDate, f64)], date: NaiveDate) -> f64 {
    let last = anchor_points[anchor_points.len() - 1];
    if date >= last.0 {
        return last.1;
    }
    let segment = anchor_points
        .windows(2)
        .find(|w| w[0].0 <= date && date < w[1].0)
        .expect("date within anchor range");
    let (d0, v0) = segment[0];
    let (d1, v1) = segment[1];
    let span = (d1 - d0).num_days() as f64;
    let frac = (date - d0).num_days() as f64 / span;
    let trend = v0 * (v1 / v0).powf(frac);
    let wiggle = 0.01 * unit_noise(tag, date, 1) * (std::f64::consts::PI * frac).sin();
    trend * wiggle.exp()
}

/// Full synthetic market series for an asset, covering the warmup and every
/// bundled window for that asset.
pub fn market_days(asset: &Asset) -> Vec<MarketDay> {
    let tag = asset_tag(asset);
    let points = anchors(asset);
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    // Window ends are flat days: open == close == the reference close.
    let end_dates: Vec<NaiveDate> = reference_splits()
        .into_iter()
        .filter(|q| &q.split.asset == asset)
        .map(|q| q.split.end)
        .collect();

    let mut days = Vec::new();
    let mut date = first;
    while date <= last {
        let open = open_price(tag, &points, date);
        let close = if end_dates.contains(&date) {
            open
        } else {
            open_price(tag, &points, date + chrono::Days::new(1))
        };
        let high = open.max(close) * (1.0 + 0.004 * unit_noise(tag, date, 2).abs());
        let low = open.min(close) * (1.0 - 0.004 * unit_noise(tag, date, 3).abs());
        let market_cap = open * supply(asset);
        let volume = market_cap * (0.04 + 0.01 * unit_noise(tag, date, 4).abs());
        days.push(MarketDay {
            date,
            open,
            high,
            low,
            close,
            volume,
            market_cap,
        });
        date = date + chrono::Days::new(1);
    }
    days
}

fn supply(asset: &Asset) -> f64 {
    match asset {
        Asset::Btc => 19.5e6,
        Asset::Eth => 120.0e6,
        Asset::Sol => 420.0e6,
        Asset::Other(_) => 1.0e8,
    }
}

/// Synthetic daily txn-stats aligned to the market series.
pub fn txn_stats_days(asset: &Asset) -> Vec<TxnStatsDay> {
    let tag = asset_tag(asset);
    market_days(asset)
        .iter()
        .map(|d| {
            let wobble = |salt: u64| 1.0 + 0.2 * unit_noise(tag, d.date, salt);
            TxnStatsDay {
                date: d.date,
                num_transactions: (1_000_000.0 * wobble(10)) as u64,
                active_wallets: (400_000.0 * wobble(11)) as u64,
                total_value_transferred: (2.5e6 * wobble(12)).round(),
                avg_gas_price: (12.0 * wobble(13) * 100.0).round() / 100.0,
                total_gas_consumed: (1.1e11 * wobble(14)).round(),
            }
        })
        .collect()
}

/// A sparse synthetic news stream: one templated article roughly weekly.
pub fn news_items(asset: &Asset) -> BTreeMap<NaiveDate, Vec<NewsItem>> {
    let tag = asset_tag(asset);
    let mut map: BTreeMap<NaiveDate, Vec<NewsItem>> = BTreeMap::new();
    for day in market_days(asset) {
        if day.date.num_days_from_ce() % 7 != 0 {
            continue;
        }
        let direction = if unit_noise(tag, day.date, 20) >= 0.0 {
            "rally"
        } else {
            "pullback"
        };
        map.insert(
            day.date,
            vec![NewsItem {
                date: day.date,
                source: "synthetic.wire".to_string(),
                title: format!("{asset} {direction} watch"),
                body_or_summary: format!(
                    "Desk notes for {}: traders weigh a possible {direction} as {asset} \
changes hands near {:.2} USD.",
                    day.date, day.open
                ),
                url: None,
            }],
        );
    }
    map
}

/// Paths of one asset's generated files.
#[derive(Debug, Clone)]
pub struct AssetFiles {
    pub market: PathBuf,
    pub txn_stats: PathBuf,
    pub news: PathBuf,
}

/// Write market, txn-stats, news, and the split table for the given assets
/// under `dir` (created if needed). Returns the per-asset file paths.
pub fn write_sample_data(dir: &Path, assets: &[Asset]) -> std::io::Result<Vec<AssetFiles>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for asset in assets {
        let ticker = asset.to_string().to_lowercase();
        let files = AssetFiles {
            market: dir.join(format!("{ticker}_market.csv")),
            txn_stats: dir.join(format!("{ticker}_txn_stats.csv")),
            news: dir.join(format!("{ticker}_news.jsonl")),
        };
        std::fs::write(&files.market, market_to_csv(&market_days(asset)))?;
        std::fs::write(&files.txn_stats, txn_stats_to_csv(&txn_stats_days(asset)))?;
        std::fs::write(&files.news, news_to_jsonl(&news_items(asset)))?;
        out.push(files);
    }
    std::fs::write(
        dir.join("splits.csv"),
        split_config_to_csv(&crate::dataio::default_splits()),
    )?;
    Ok(out)
}
