use super::{Token, TokenKind};
use crate::value::Value;

const WORD_NUMBERS: &[&str] = &[
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

fn scale(word: &str) -> Option<i64> {
    match word {
        "hundred" => Some(100),
        "thousand" => Some(1_000),
        "million" => Some(1_000_000),
        "billion" => Some(1_000_000_000),
        _ => None,
    }
}

fn word_number(word: &str) -> Option<i64> {
    WORD_NUMBERS
        .iter()
        .position(|w| *w == word)
        .map(|i| i as i64)
}

fn multiply(v: &Value, factor: i64) -> Value {
    match v {
        Value::Int(i) => i
            .checked_mul(factor)
            .map(Value::Int)
            .unwrap_or(Value::Real(*i as f64 * factor as f64)),
        Value::Real(r) => {
            let product = r * factor as f64;
            if product.fract() == 0.0 && product.abs() < i64::MAX as f64 {
                Value::Int(product as i64)
            } else {
                Value::Real(product)
            }
        }
        other => other.clone(),
    }
}

/// Turns spelled numbers ("five") into numbers and folds a following scale
/// word into the value ("2 million" -> 2000000).
pub fn parse_quantity(tokens: Vec<Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    for mut token in tokens {
        if token.kind == TokenKind::Word {
            let lower = token.surface.to_lowercase();
            if let Some(n) = word_number(&lower) {
                token.kind = TokenKind::Number;
                token.numeric_value = Some(Value::Int(n));
                token.lemma = n.to_string();
            } else if let Some(factor) = scale(&lower) {
                if let Some(prev) = out.last_mut().filter(|p| p.kind == TokenKind::Number) {
                    let value = multiply(
                        prev.numeric_value.as_ref().unwrap_or(&Value::Int(1)),
                        factor,
                    );
                    prev.lemma = value.to_string();
                    prev.numeric_value = Some(value);
                    prev.surface = format!("{} {}", prev.surface, token.surface);
                    prev.phrase = prev.surface.clone();
                    prev.end_position = token.end_position;
                    continue;
                }
            }
        }
        out.push(token);
    }
    out
}
