//! Grid-tuner behavior on engineered and randomized data.

mod common;

use common::{dataset_from_opens, split_over};
use tradebench::engine::FeeModel;
use tradebench::metrics::summarize;
use tradebench::strategies::{default_grid, tune, StrategySpec, TuneMetric};

/// Alternating sharp regimes: a short window tracks each leg quickly while
/// long windows whipsaw, so the 5-day SMA wins the grid.
fn regime_change_opens() -> Vec<f64> {
    let mut opens = Vec::new();
    let mut price: f64 = 100.0;
    for _ in 0..35 {
        opens.push(price);
        price *= 1.001; // calm warmup
    }
    for leg in 0..8 {
        let step = if leg % 2 == 0 { 1.03 } else { 0.97 };
        for _ in 0..10 {
            opens.push(price);
            price *= step;
        }
    }
    opens
}

#[test]
fn fast_regime_change_selects_the_short_window() {
    let dataset = dataset_from_opens("2023-01-01", &regime_change_opens());
    let split = split_over(&dataset);
    let grid = default_grid("sma").unwrap();
    let fee = FeeModel::new(0.001).unwrap();
    let report = tune(
        &dataset,
        &split,
        &grid,
        fee,
        1_000_000.0,
        TuneMetric::TotalReturn,
    )
    .unwrap();

    // Exhaustive external re-run.
    let mut best: Option<(StrategySpec, f64)> = None;
    for spec in &grid {
        let mut strategy = spec.build().unwrap();
        let result =
            tradebench::engine::run_backtest(&dataset, &split, strategy.as_mut(), fee, 1_000_000.0)
                .unwrap();
        let score = summarize(&result).unwrap().total_return_pct;
        if best.as_ref().map(|(_, s)| score > *s).unwrap_or(true) {
            best = Some((spec.clone(), score));
        }
    }
    let (expected, _) = best.unwrap();
    assert_eq!(report.chosen, expected);
    assert_eq!(report.chosen, StrategySpec::Sma { window: 5 });
}

#[test]
fn slma_grid_is_all_ordered_pairs() {
    let grid = default_grid("slma").unwrap();
    assert_eq!(grid.len(), 10);
    let dataset = dataset_from_opens("2023-01-01", &regime_change_opens());
    let split = split_over(&dataset);
    let report = tune(
        &dataset,
        &split,
        &grid,
        FeeModel::ZERO,
        1_000_000.0,
        TuneMetric::TotalReturn,
    )
    .unwrap();
    assert_eq!(report.scores.len(), 10);
    assert!(grid.contains(&report.chosen));
}

#[test]
fn tuning_is_deterministic() {
    let dataset = dataset_from_opens("2023-01-01", &regime_change_opens());
    let split = split_over(&dataset);
    let grid = default_grid("sma").unwrap();
    let run = || {
        let report = tune(
            &dataset,
            &split,
            &grid,
            FeeModel::new(0.002).unwrap(),
            1_000_000.0,
            TuneMetric::TotalReturn,
        )
        .unwrap();
        serde_json::to_string(&report).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn tune_failure_names_the_offending_spec() {
    // A single-day validation split yields one daily return, which is too
    // few for a Sharpe, so scoring fails and the error carries the spec.
    let dataset = dataset_from_opens("2023-01-01", &[100.0, 101.0]);
    let split = split_over(&dataset);
    let grid = vec![StrategySpec::Sma { window: 5 }];
    let err = tune(
        &dataset,
        &split,
        &grid,
        FeeModel::ZERO,
        1_000_000.0,
        TuneMetric::TotalReturn,
    )
    .unwrap_err();
    assert!(err.to_string().contains("sma(window=5)"), "{err}");
}

#[test]
fn ties_break_toward_higher_sharpe_then_smaller_params() {
    // A constant price series: every SMA window holds throughout, so all
    // specs tie at 0% return and 0 sharpe; the smallest window wins.
    let dataset = dataset_from_opens("2023-01-01", &[100.0; 50]);
    let split = split_over(&dataset);
    let grid = default_grid("sma").unwrap();
    let report = tune(
        &dataset,
        &split,
        &grid,
        FeeModel::ZERO,
        1_000_000.0,
        TuneMetric::TotalReturn,
    )
    .unwrap();
    assert_eq!(report.chosen, StrategySpec::Sma { window: 5 });
}
