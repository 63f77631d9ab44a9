//! Evaluation metrics over a completed run: total return, daily return
//! mean/std, and Sharpe ratio, plus table rendering.
//!
//! The valuation sequence has one net-worth point per date: the starting net
//! worth (which shares the first trading day's date), each later trading
//! day's post-action net worth, and the final valuation. A run over n
//! transaction days therefore yields n daily returns, and the compounded
//! returns telescope exactly to `final / start`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RunResult;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("starting net worth must be positive, got {0}")]
    NonPositiveStart(f64),
    #[error("net worth at step {index} must be positive, got {value}")]
    NonPositiveWorth { index: usize, value: f64 },
    #[error("need at least 2 daily returns, got {0}")]
    TooFewReturns(usize),
}

/// The Sharpe ratio with a degeneracy marker for zero-variance runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sharpe {
    pub value: f64,
    /// True when the return std was zero and the ratio was defined as 0.
    pub degenerate: bool,
}

/// The four headline metrics of a run. Percent fields are in percent units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub total_return_pct: f64,
    pub daily_return_mean_pct: f64,
    pub daily_return_std_pct: f64,
    pub sharpe: f64,
    pub degenerate_std: bool,
}

/// Net-worth valuation sequence of a run, one point per date.
fn worth_sequence(result: &RunResult) -> Vec<f64> {
    let mut seq = Vec::with_capacity(result.records.len() + 1);
    seq.push(result.start_net_worth);
    seq.extend(result.records.iter().skip(1).map(|r| r.net_worth));
    seq.push(result.final_net_worth);
    seq
}

/// Total return in percent: `(end - start) / start * 100`.
pub fn total_return(result: &RunResult) -> Result<f64, MetricsError> {
    if result.start_net_worth <= 0.0 {
        return Err(MetricsError::NonPositiveStart(result.start_net_worth));
    }
    Ok((result.final_net_worth - result.start_net_worth) / result.start_net_worth * 100.0)
}

/// Daily returns (as fractions) over the valuation sequence.
pub fn daily_returns(result: &RunResult) -> Result<Vec<f64>, MetricsError> {
    let seq = worth_sequence(result);
    for (index, &value) in seq.iter().enumerate() {
        if value <= 0.0 || !value.is_finite() {
            return Err(MetricsError::NonPositiveWorth { index, value });
        }
    }
    Ok(seq.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n-1) standard deviation.
fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    var.sqrt()
}

/// Sharpe ratio of the daily returns: `(mean - risk_free) / std` with the
/// sample standard deviation. A zero std yields 0 with the degenerate flag.
pub fn sharpe(result: &RunResult, risk_free: f64) -> Result<Sharpe, MetricsError> {
    let returns = daily_returns(result)?;
    if returns.len() < 2 {
        return Err(MetricsError::TooFewReturns(returns.len()));
    }
    let std = sample_std(&returns);
    if std == 0.0 {
        return Ok(Sharpe {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Sharpe {
        value: (mean(&returns) - risk_free) / std,
        degenerate: false,
    })
}

/// Compute all four metrics (risk-free rate 0).
pub fn summarize(result: &RunResult) -> Result<MetricsSummary, MetricsError> {
    let returns = daily_returns(result)?;
    if returns.len() < 2 {
        return Err(MetricsError::TooFewReturns(returns.len()));
    }
    let s = sharpe(result, 0.0)?;
    Ok(MetricsSummary {
        total_return_pct: total_return(result)?,
        daily_return_mean_pct: mean(&returns) * 100.0,
        daily_return_std_pct: sample_std(&returns) * 100.0,
        sharpe: s.value,
        degenerate_std: s.degenerate,
    })
}

/// Output format for comparison tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Md,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "md" => Ok(TableFormat::Md),
            "csv" => Ok(TableFormat::Csv),
            other => Err(format!(
                "unknown table format `{other}` (expected md or csv)"
            )),
        }
    }
}

/// Render labeled summaries as a table, one data row per label in input
/// order. Values use fixed 2-decimal rendering; daily return is `mean±std`.
pub fn render_table(rows: &[(String, MetricsSummary)], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Md => {
            out.push_str("| Strategy | Total Return (%) | Daily Return (%) | Sharpe Ratio |\n");
            out.push_str("|---|---|---|---|\n");
            for (label, m) in rows {
                out.push_str(&format!(
                    "| {label} | {:.2} | {:.2}±{:.2} | {:.2} |\n",
                    m.total_return_pct, m.daily_return_mean_pct, m.daily_return_std_pct, m.sharpe
                ));
            }
        }
        TableFormat::Csv => {
            out.push_str("strategy,total_return_pct,daily_return_pct,sharpe\n");
            for (label, m) in rows {
                out.push_str(&format!(
                    "{label},{:.2},{:.2}±{:.2},{:.2}\n",
                    m.total_return_pct, m.daily_return_mean_pct, m.daily_return_std_pct, m.sharpe
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{RunRecord, TradeAction};
    use chrono::NaiveDate;

    /// Build a RunResult from a per-date net-worth sequence
    /// `[start, day2, ..., dayN, final]`.
    pub(crate) fn result_from_worths(worths: &[f64]) -> RunResult {
        assert!(worths.len() >= 2);
        let start: NaiveDate = "2023-01-01".parse().unwrap();
        let n_days = worths.len() - 1;
        let records = (0..n_days)
            .map(|i| RunRecord {
                date: start + chrono::Days::new(i as u64),
                execution_price: 100.0,
                action: TradeAction::HOLD,
                fee_paid: 0.0,
                post_cash: worths[i],
                post_holdings: 0.0,
                net_worth: worths[i],
            })
            .collect();
        RunResult {
            records,
            start_net_worth: worths[0],
            final_net_worth: worths[worths.len() - 1],
        }
    }

    #[test]
    fn total_return_basic() {
        let r = result_from_worths(&[1_000_000.0, 1_050_000.0, 1_100_000.0]);
        assert!((total_return(&r).unwrap() - 10.0).abs() < 1e-12);
        let flat = result_from_worths(&[5.0, 5.0]);
        assert_eq!(total_return(&flat).unwrap(), 0.0);
    }

    #[test]
    fn total_return_rejects_non_positive_start() {
        let mut r = result_from_worths(&[1.0, 2.0]);
        r.start_net_worth = 0.0;
        assert_eq!(total_return(&r), Err(MetricsError::NonPositiveStart(0.0)));
    }

    #[test]
    fn daily_returns_hand_arithmetic() {
        let r = result_from_worths(&[100.0, 110.0, 99.0]);
        let returns = daily_returns(&r).unwrap();
        assert_eq!(returns.len(), 2);
        assert!((returns[0] - 0.10).abs() < 1e-12);
        assert!((returns[1] + 0.10).abs() < 1e-12);
    }

    #[test]
    fn daily_returns_constant_worth_is_zero() {
        let r = result_from_worths(&[7.0, 7.0, 7.0, 7.0]);
        assert!(daily_returns(&r).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn daily_returns_single_day_run_has_one_element() {
        let r = result_from_worths(&[100.0, 103.0]);
        let returns = daily_returns(&r).unwrap();
        assert_eq!(returns.len(), 1);
        assert!((returns[0] - 0.03).abs() < 1e-12);
    }

    #[test]
    fn sharpe_matches_published_rounding() {
        // Two returns m±x with x = s/sqrt(2) have sample mean m and sample
        // std s; m=0.56%, s=2.23% must round to a 0.25 Sharpe.
        let m = 0.0056;
        let x = 0.0223 / 2.0_f64.sqrt();
        let w0 = 1_000_000.0;
        let w1 = w0 * (1.0 + m + x);
        let w2 = w1 * (1.0 + m - x);
        let r = result_from_worths(&[w0, w1, w2]);
        let s = sharpe(&r, 0.0).unwrap();
        assert!(!s.degenerate);
        assert_eq!(format!("{:.2}", s.value), "0.25");
    }

    #[test]
    fn sharpe_zero_variance_is_degenerate_zero() {
        let w0 = 100.0;
        let r = result_from_worths(&[w0, w0 * 1.01, w0 * 1.01 * 1.01]);
        let s = sharpe(&r, 0.0).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.degenerate);
    }

    #[test]
    fn sharpe_zero_mean_is_zero() {
        let w0 = 100.0;
        let r = result_from_worths(&[w0, w0 * 1.01, w0 * 1.01 * 0.99]);
        let s = sharpe(&r, 0.0).unwrap();
        assert!(s.value.abs() < 1e-12);
    }

    #[test]
    fn sharpe_needs_two_returns() {
        let r = result_from_worths(&[100.0, 101.0]);
        assert_eq!(sharpe(&r, 0.0), Err(MetricsError::TooFewReturns(1)));
    }

    #[test]
    fn summary_identity_between_sharpe_mean_std() {
        let r = result_from_worths(&[100.0, 104.0, 101.0, 103.0]);
        let m = summarize(&r).unwrap();
        assert!((m.sharpe * m.daily_return_std_pct - m.daily_return_mean_pct).abs() < 1e-9);
    }

    #[test]
    fn render_table_md_and_csv() {
        let m = MetricsSummary {
            total_return_pct: 39.66,
            daily_return_mean_pct: 0.56,
            daily_return_std_pct: 2.23,
            sharpe: 0.251,
            degenerate_std: false,
        };
        let rows = vec![("buy_and_hold".to_string(), m)];
        let md = render_table(&rows, TableFormat::Md);
        assert!(md.contains("| buy_and_hold | 39.66 | 0.56±2.23 | 0.25 |"));
        let csv = render_table(&rows, TableFormat::Csv);
        assert!(csv.contains("buy_and_hold,39.66,0.56±2.23,0.25"));
    }

    #[test]
    fn render_table_empty_is_header_only() {
        let md = render_table(&[], TableFormat::Md);
        assert_eq!(md.lines().count(), 2);
        let csv = render_table(&[], TableFormat::Csv);
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn total_return_scale_invariance() {
        let base = result_from_worths(&[100.0, 104.0, 101.0, 103.0]);
        let scaled = result_from_worths(&[1000.0, 1040.0, 1010.0, 1030.0]);
        assert!((total_return(&base).unwrap() - total_return(&scaled).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn compounded_returns_telescope() {
        let r = result_from_worths(&[100.0, 104.0, 101.0, 103.0, 99.5]);
        let product: f64 = daily_returns(&r).unwrap().iter().map(|x| 1.0 + x).product();
        let ratio = r.final_net_worth / r.start_net_worth;
        assert!((product - ratio).abs() <= 1e-9 * ratio.abs());
    }

    #[test]
    fn sharpe_shift_invariance_with_risk_free() {
        // Shifting every daily return by c and the risk-free rate by c leaves
        // the ratio unchanged.
        let returns = [0.01, -0.02, 0.015, 0.003];
        let c = 0.005;
        let build = |rs: &[f64]| {
            let mut w = vec![100.0];
            for r in rs {
                w.push(w.last().unwrap() * (1.0 + r));
            }
            result_from_worths(&w)
        };
        let shifted: Vec<f64> = returns.iter().map(|r| r + c).collect();
        let s0 = sharpe(&build(&returns), 0.0).unwrap();
        let s1 = sharpe(&build(&shifted), c).unwrap();
        assert!((s0.value - s1.value).abs() < 1e-9);
    }
}
