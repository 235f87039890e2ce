//! Timer span parsing ("5 minutes", "1 hour 30 minutes", "90 seconds").

use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot read `{0}` as a duration")]
pub struct SpanError(pub String);

static TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?|[a-z]+").expect("static regex"));

fn number_word(word: &str) -> Option<f64> {
    let n = match word {
        "a" | "an" | "one" => 1,
        "two" => 2,
        "three" => 3,
        "four" => 4,
        "five" => 5,
        "six" => 6,
        "seven" => 7,
        "eight" => 8,
        "nine" => 9,
        "ten" => 10,
        "eleven" => 11,
        "twelve" => 12,
        "fifteen" => 15,
        "twenty" => 20,
        "thirty" => 30,
        "forty" => 40,
        "fortyfive" => 45,
        "fifty" => 50,
        "sixty" => 60,
        "ninety" => 90,
        _ => return None,
    };
    Some(n as f64)
}

fn unit_seconds(word: &str) -> Option<f64> {
    match word {
        "s" | "sec" | "secs" | "second" | "seconds" => Some(1.0),
        "m" | "min" | "mins" | "minute" | "minutes" => Some(60.0),
        "h" | "hr" | "hrs" | "hour" | "hours" => Some(3600.0),
        _ => None,
    }
}

/// Parse a human duration into whole seconds.
///
/// Accepts `N unit` groups joined by spaces, commas or "and"; units are
/// seconds, minutes and hours. A bare number means minutes.
pub fn parse_span(text: &str) -> Result<u64, SpanError> {
    let err = || SpanError(text.to_string());
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = TOKEN
        .find_iter(&lower)
        .map(|m| m.as_str())
        .filter(|t| *t != "and")
        .collect();
    if tokens.is_empty() {
        return Err(err());
    }

    let parse_number = |t: &str| -> Option<f64> {
        if t.as_bytes()[0].is_ascii_digit() {
            t.parse::<f64>().ok()
        } else {
            number_word(t)
        }
    };

    if tokens.len() == 1 {
        let minutes = parse_number(tokens[0]).ok_or_else(err)?;
        return to_seconds(minutes * 60.0).ok_or_else(err);
    }

    let mut total = 0.0;
    let mut i = 0;
    while i < tokens.len() {
        let mut amount = parse_number(tokens[i]).ok_or_else(err)?;
        i += 1;
        // "half an hour", "one and a half hours" are not worth the grammar;
        // but "an hour and a half" shows up often enough.
        let unit = tokens.get(i).and_then(|u| unit_seconds(u)).ok_or_else(err)?;
        i += 1;
        if tokens.get(i) == Some(&"a") && tokens.get(i + 1) == Some(&"half") {
            amount += 0.5;
            i += 2;
        }
        total += amount * unit;
    }
    to_seconds(total).ok_or_else(err)
}

fn to_seconds(value: f64) -> Option<u64> {
    let secs = value.round();
    (1.0..1e12).contains(&secs).then_some(secs as u64)
}
