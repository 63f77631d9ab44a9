//! Pure windowed computations over price series: SMA, EMA, MACD and
//! Bollinger Bands.
//!
//! All indicators operate on daily open prices (the engine acts at the open;
//! feeding the same-day close would leak the future). SMA and Bollinger are
//! undefined (`None`) before their window fills; EMA and MACD are seeded from
//! the first value and defined everywhere.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MACD_FAST: usize = 12;
pub const MACD_SLOW: usize = 26;
pub const MACD_SIGNAL: usize = 9;
pub const BOLLINGER_WINDOW: usize = 20;
pub const BOLLINGER_MULTIPLIER: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum IndicatorError {
    #[error("window must be at least {min}, got {got}")]
    WindowTooSmall { min: usize, got: usize },
    #[error("macd requires fast < slow, got fast={fast} slow={slow}")]
    BadMacdWindows { fast: usize, slow: usize },
    #[error("multiplier must be positive, got {0}")]
    NonPositiveMultiplier(f64),
    #[error("series is empty")]
    EmptySeries,
    #[error("price at index {index} must be finite and positive, got {value}")]
    InvalidPrice { index: usize, value: f64 },
}

/// An ordered series of positive, finite USD prices, index-aligned to dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries(Vec<f64>);

impl PriceSeries {
    pub fn new(values: Vec<f64>) -> Result<Self, IndicatorError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(IndicatorError::InvalidPrice { index, value });
            }
        }
        Ok(PriceSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One MACD observation; `histogram` is exactly `macd - signal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacdPoint {
    pub macd: f64,
    pub signal: f64,
    pub histogram: f64,
}

/// One Bollinger observation; bands are symmetric around the middle SMA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BollingerPoint {
    pub middle: f64,
    pub upper: f64,
    pub lower: f64,
}

/// Trailing simple moving average; `None` until the window fills.
pub fn sma(series: &PriceSeries, window: usize) -> Result<Vec<Option<f64>>, IndicatorError> {
    Ok(sma_raw(series.values(), window)?)
}

fn sma_raw(values: &[f64], window: usize) -> Result<Vec<Option<f64>>, IndicatorError> {
    if window == 0 {
        return Err(IndicatorError::WindowTooSmall { min: 1, got: 0 });
    }
    Ok((0..values.len())
        .map(|t| {
            (t + 1 >= window)
                .then(|| values[t + 1 - window..=t].iter().sum::<f64>() / window as f64)
        })
        .collect())
}

/// Exponential moving average seeded from the first value:
/// `ema[0] = p[0]`, `ema[t] = a*p[t] + (1-a)*ema[t-1]` with `a = 2/(window+1)`.
pub fn ema(series: &PriceSeries, window: usize) -> Result<Vec<f64>, IndicatorError> {
    if series.is_empty() {
        return Err(IndicatorError::EmptySeries);
    }
    ema_raw(series.values(), window)
}

fn ema_raw(values: &[f64], window: usize) -> Result<Vec<f64>, IndicatorError> {
    if window == 0 {
        return Err(IndicatorError::WindowTooSmall { min: 1, got: 0 });
    }
    let alpha = 2.0 / (window as f64 + 1.0);
    let mut out = Vec::with_capacity(values.len());
    let mut prev = f64::NAN;
    for (t, &p) in values.iter().enumerate() {
        // a*p + (1-a)*prev, written so a constant series is a bit-exact
        // fixed point.
        prev = if t == 0 {
            p
        } else {
            p + (1.0 - alpha) * (prev - p)
        };
        out.push(prev);
    }
    Ok(out)
}

/// MACD line (fast EMA minus slow EMA) with its signal line (EMA of the MACD
/// line) and histogram.
pub fn macd(
    series: &PriceSeries,
    fast: usize,
    slow: usize,
    signal: usize,
) -> Result<Vec<MacdPoint>, IndicatorError> {
    if fast == 0 || signal == 0 {
        return Err(IndicatorError::WindowTooSmall { min: 1, got: 0 });
    }
    if fast >= slow {
        return Err(IndicatorError::BadMacdWindows { fast, slow });
    }
    if series.is_empty() {
        return Ok(Vec::new());
    }
    let fast_ema = ema_raw(series.values(), fast)?;
    let slow_ema = ema_raw(series.values(), slow)?;
    let macd_line: Vec<f64> = fast_ema.iter().zip(&slow_ema).map(|(f, s)| f - s).collect();
    let signal_line = ema_raw(&macd_line, signal)?;
    Ok(macd_line
        .into_iter()
        .zip(signal_line)
        .map(|(m, s)| MacdPoint {
            macd: m,
            signal: s,
            histogram: m - s,
        })
        .collect())
}

/// Bollinger Bands: trailing SMA middle band with `multiplier` population
/// standard deviations on either side; `None` until the window fills.
pub fn bollinger(
    series: &PriceSeries,
    window: usize,
    multiplier: f64,
) -> Result<Vec<Option<BollingerPoint>>, IndicatorError> {
    if window < 2 {
        return Err(IndicatorError::WindowTooSmall {
            min: 2,
            got: window,
        });
    }
    if !multiplier.is_finite() || multiplier <= 0.0 {
        return Err(IndicatorError::NonPositiveMultiplier(multiplier));
    }
    let values = series.values();
    Ok((0..values.len())
        .map(|t| {
            (t + 1 >= window).then(|| {
                let slice = &values[t + 1 - window..=t];
                let mean = slice.iter().sum::<f64>() / window as f64;
                let variance =
                    slice.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / window as f64;
                let half_width = multiplier * variance.sqrt();
                BollingerPoint {
                    middle: mean,
                    upper: mean + half_width,
                    lower: mean - half_width,
                }
            })
        })
        .collect())
}
