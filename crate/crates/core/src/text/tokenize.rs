use super::{Tag, TextError, Token, TokenKind};
use crate::value::Value;

/// Splits text into words, numbers, quoted literals and punctuation.
///
/// Digit groups such as "1,479" collapse into one number. A word keeps
/// internal apostrophes ("I've", "boy's") and hyphens. Quoted spans in
/// single or double quotes become one `QuotedLiteral` token including the
/// quotes. An unterminated quote is treated as punctuation.
pub fn tokenize(text: &str) -> Result<Vec<Token>, TextError> {
    if text.trim().is_empty() {
        return Err(TextError::EmptyQuery);
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map(|c| c.0).unwrap_or(text.len());
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (kind, next) = if c.is_ascii_digit() {
            (TokenKind::Number, scan_number(&chars, i))
        } else if c.is_alphabetic() {
            (TokenKind::Word, scan_word(&chars, i))
        } else if is_quote(c) && (i == 0 || chars[i - 1].1.is_whitespace()) {
            match chars[i + 1..].iter().position(|&(_, d)| closes(c, d)) {
                Some(k) if k > 0 => (TokenKind::QuotedLiteral, i + k + 2),
                _ => (TokenKind::Punctuation, i + 1),
            }
        } else {
            (TokenKind::Punctuation, i + 1)
        };
        let end = end_of(next);
        let surface = &text[start..end];
        tokens.push(make_token(surface, kind, tokens.len() + 1, start));
        i = next;
    }
    Ok(tokens)
}

fn make_token(surface: &str, kind: TokenKind, position: usize, offset: usize) -> Token {
    let numeric_value = match kind {
        TokenKind::Number => Some(number_value(surface)),
        _ => None,
    };
    let lemma = match kind {
        TokenKind::Word | TokenKind::Punctuation => surface.to_lowercase(),
        TokenKind::Number => numeric_value
            .as_ref()
            .map(|v| v.to_string())
            .unwrap_or_default(),
        TokenKind::QuotedLiteral => super::unquote(surface).to_lowercase(),
    };
    let proper = kind == TokenKind::Word
        && position > 1
        && surface.chars().next().is_some_and(char::is_uppercase);
    Token {
        surface: surface.to_string(),
        lemma,
        position,
        end_position: position,
        kind,
        tag: Tag::Other,
        numeric_value,
        offset,
        phrase: surface.to_string(),
        proper,
    }
}

fn number_value(surface: &str) -> Value {
    let digits: String = surface.chars().filter(|c| *c != ',').collect();
    if digits.contains('.') {
        digits.parse().map(Value::Real).unwrap_or(Value::Real(0.0))
    } else {
        match digits.parse::<i64>() {
            Ok(v) => Value::Int(v),
            Err(_) => Value::Real(digits.parse().unwrap_or(f64::MAX)),
        }
    }
}

fn is_quote(c: char) -> bool {
    matches!(c, '\'' | '"' | '‘' | '“')
}

fn closes(open: char, c: char) -> bool {
    match open {
        '‘' => c == '’',
        '“' => c == '”',
        _ => c == open,
    }
}

fn digit_at(chars: &[(usize, char)], i: usize) -> bool {
    chars.get(i).is_some_and(|c| c.1.is_ascii_digit())
}

/// Integer, optional ",ddd" groups, optional ".d+" fraction. A trailing
/// letter run is not absorbed, so "5th" becomes [5][th].
fn scan_number(chars: &[(usize, char)], mut i: usize) -> usize {
    while digit_at(chars, i) {
        i += 1;
    }
    loop {
        let group = chars.get(i).is_some_and(|c| c.1 == ',')
            && (1..=3).all(|k| digit_at(chars, i + k))
            && !digit_at(chars, i + 4);
        if !group {
            break;
        }
        i += 4;
    }
    if chars.get(i).is_some_and(|c| c.1 == '.') && digit_at(chars, i + 1) {
        i += 1;
        while digit_at(chars, i) {
            i += 1;
        }
    }
    i
}

fn scan_word(chars: &[(usize, char)], mut i: usize) -> usize {
    let body = |c: char| c.is_alphanumeric() || c == '_';
    while chars.get(i).is_some_and(|c| body(c.1)) {
        i += 1;
    }
    // Internal apostrophes and hyphens continue the word only when a
    // letter follows them.
    while chars
        .get(i)
        .is_some_and(|c| matches!(c.1, '\'' | '’' | '-'))
        && chars.get(i + 1).is_some_and(|c| c.1.is_alphabetic())
    {
        i += 1;
        while chars.get(i).is_some_and(|c| body(c.1)) {
            i += 1;
        }
    }
    i
}
