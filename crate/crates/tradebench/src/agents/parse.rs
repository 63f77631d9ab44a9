//! Extraction of a trade action from free-form model output.

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::engine::TradeAction;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("no decimal number in [-1, 1] found in the response")]
    NoActionFound,
}

static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[-+]?(?:\d+\.?\d*|\.\d+)").expect("valid regex"));

/// Keywords that mark a line as carrying the decision.
pub const ACTION_KEYWORDS: [&str; 2] = ["action", "decision"];

/// Numbers in [-1, 1] on one line, skipping tokens glued to other digits or
/// dots (date fragments like `2023-10-01`, version strings, etc.).
fn in_range_numbers(line: &str) -> Vec<f64> {
    let mut out = Vec::new();
    for m in NUMBER.find_iter(line) {
        if m.start() > 0 {
            let prev = line.as_bytes()[m.start() - 1];
            if prev.is_ascii_digit() || prev == b'.' {
                continue;
            }
        }
        if let Ok(v) = m.as_str().parse::<f64>() {
            if (-1.0..=1.0).contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Extract the final decimal number in [-1, 1] from `response`, preferring
/// numbers on lines that contain an action keyword.
pub fn parse_action(response: &str) -> Result<TradeAction, ParseError> {
    let mut keyword_hit: Option<f64> = None;
    let mut any_hit: Option<f64> = None;
    for line in response.lines() {
        let numbers = in_range_numbers(line);
        if let Some(&last) = numbers.last() {
            any_hit = Some(last);
            let lowered = line.to_lowercase();
            if ACTION_KEYWORDS.iter().any(|k| lowered.contains(k)) {
                keyword_hit = Some(last);
            }
        }
    }
    let value = keyword_hit.or(any_hit).ok_or(ParseError::NoActionFound)?;
    Ok(TradeAction::new(value).expect("range-checked above"))
}

/// The documented response template; `parse_action` recovers the action
/// exactly from its output.
pub fn render_action_response(action: f64) -> String {
    format!("Scripted decision.\naction: {action}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prose_with_trailing_number() {
        let a = parse_action("After weighing the reports, I recommend an action of 0.3.").unwrap();
        assert_eq!(a.fraction(), 0.3);
    }

    #[test]
    fn parses_full_sell() {
        let a = parse_action("Sell everything: -1").unwrap();
        assert_eq!(a.fraction(), -1.0);
    }

    #[test]
    fn no_number_is_a_parse_failure() {
        assert_eq!(
            parse_action("Strongly bullish!"),
            Err(ParseError::NoActionFound)
        );
    }

    #[test]
    fn prefers_the_keyword_line() {
        let text = "Confidence is about 0.9 today.\nFinal decision: 0.25\nGood luck.";
        assert_eq!(parse_action(text).unwrap().fraction(), 0.25);
    }

    #[test]
    fn takes_the_final_number_on_the_keyword_line() {
        let text = "action: first 0.5 then settle on -0.5";
        assert_eq!(parse_action(text).unwrap().fraction(), -0.5);
    }

    #[test]
    fn ignores_out_of_range_numbers_and_date_fragments() {
        let text = "On 2023-10-01 the price rose 25 points.\naction: 0.75";
        assert_eq!(parse_action(text).unwrap().fraction(), 0.75);
        // A date alone offers no in-range number.
        assert!(parse_action("As of 2023-10-01, hold steady.").is_err());
    }

    #[test]
    fn round_trips_the_documented_template() {
        for k in -1000..=1000 {
            let a = k as f64 / 1000.0;
            let parsed = parse_action(&render_action_response(a)).unwrap();
            assert_eq!(parsed.fraction(), a, "failed for {a}");
        }
    }
}
