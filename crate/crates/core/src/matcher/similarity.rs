use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::Vocabulary;
use crate::text::Lemmatizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("both strings are empty")]
    BothEmpty,
    #[error("the first argument is empty")]
    EmptyFirstArgument,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityBreakdown {
    pub homo: f64,
    pub lambda: f64,
    pub psi: f64,
    pub sigma: f64,
}

fn chars(s: &str) -> Vec<char> {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Levenshtein distance over lowercase characters.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let (a, b) = (chars(a), chars(b));
    if a.is_empty() || b.is_empty() {
        return a.len().max(b.len());
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn contains(hay: &[char], needle: &[char]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

/// Zero when either string contains the other, else the plain distance.
pub fn edit_distance_adjusted(a: &str, b: &str) -> usize {
    let (ca, cb) = (chars(a), chars(b));
    if contains(&ca, &cb) || contains(&cb, &ca) {
        0
    } else {
        edit_distance(a, b)
    }
}

pub fn lambda_sim(a: &str, b: &str) -> Result<f64, SimilarityError> {
    let max = a.chars().count().max(b.chars().count());
    if max == 0 {
        return Err(SimilarityError::BothEmpty);
    }
    let lev = edit_distance_adjusted(a, b);
    Ok((max - lev.min(max)) as f64 / max as f64)
}

/// Length of the longest run of `a` that also occurs in `b`, over `|a|`.
pub fn psi_sim(a: &str, b: &str) -> Result<f64, SimilarityError> {
    let (ca, cb) = (chars(a), chars(b));
    if ca.is_empty() {
        return Err(SimilarityError::EmptyFirstArgument);
    }
    let mut best = 0;
    let mut prev = vec![0usize; cb.len() + 1];
    for i in 1..=ca.len() {
        let mut cur = vec![0usize; cb.len() + 1];
        for j in 1..=cb.len() {
            if ca[i - 1] == cb[j - 1] {
                cur[j] = prev[j - 1] + 1;
                best = best.max(cur[j]);
            }
        }
        prev = cur;
    }
    Ok(best as f64 / ca.len() as f64)
}

/// American Soundex: first letter plus three digits. `None` when the input
/// has no ASCII letters.
pub fn soundex(word: &str) -> Option<String> {
    fn code(c: char) -> Option<char> {
        match c {
            'b' | 'f' | 'p' | 'v' => Some('1'),
            'c' | 'g' | 'j' | 'k' | 'q' | 's' | 'x' | 'z' => Some('2'),
            'd' | 't' => Some('3'),
            'l' => Some('4'),
            'm' | 'n' => Some('5'),
            'r' => Some('6'),
            _ => None,
        }
    }
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let first = *letters.first()?;
    let mut out = String::from(first.to_ascii_uppercase());
    let mut last = code(first);
    for &c in &letters[1..] {
        let d = code(c);
        match d {
            Some(digit) if d != last => {
                out.push(digit);
                if out.len() == 4 {
                    break;
                }
            }
            _ => {}
        }
        // h and w do not separate equal codes; vowels do.
        if !matches!(c, 'h' | 'w') {
            last = d;
        }
    }
    while out.len() < 4 {
        out.push('0');
    }
    Some(out)
}

fn default_lemmatizer() -> &'static Lemmatizer {
    static L: OnceLock<Lemmatizer> = OnceLock::new();
    L.get_or_init(Lemmatizer::default)
}

/// Lowercase with `_`, `-` and spaces removed: "Media_Type" -> "mediatype".
pub fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '_' | '-' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

pub fn homo_sim(a: &str, b: &str, vocabulary: &Vocabulary) -> f64 {
    let (na, nb) = (normalize_name(a), normalize_name(b));
    if na.is_empty() || nb.is_empty() {
        return 0.0;
    }
    let lem = default_lemmatizer();
    let (la, lb) = (lem.lemma(&na), lem.lemma(&nb));
    let related = la == lb
        || vocabulary.same_group(&na, &nb)
        || vocabulary.same_group(&la, &nb)
        || vocabulary.same_group(&na, &lb)
        || vocabulary.same_group(&la, &lb)
        || matches!((soundex(&na), soundex(&nb)), (Some(x), Some(y)) if x == y);
    if related {
        1.0
    } else {
        0.0
    }
}

pub fn sigma(
    a: &str,
    b: &str,
    vocabulary: &Vocabulary,
) -> Result<SimilarityBreakdown, SimilarityError> {
    let psi = psi_sim(a, b)?;
    let lambda = lambda_sim(a, b)?;
    let homo = homo_sim(a, b, vocabulary);
    Ok(SimilarityBreakdown {
        homo,
        lambda,
        psi,
        sigma: (homo + lambda + psi) / 3.0,
    })
}

/// σ of a query term against a schema name, taking the best of the name
/// itself and every vocabulary alias of it. Both sides are compared with
/// delimiters stripped so "track id" meets "TrackId".
pub fn name_similarity(term: &str, name: &str, vocabulary: &Vocabulary) -> f64 {
    let t = normalize_name(term);
    let n = normalize_name(name);
    if t.is_empty() || n.is_empty() {
        return 0.0;
    }
    let direct = sigma(&t, &n, vocabulary).map(|s| s.sigma).unwrap_or(0.0);
    vocabulary
        .synonyms_of(&n)
        .iter()
        .filter_map(|alias| sigma(&t, alias, vocabulary).ok())
        .map(|s| s.sigma)
        .fold(direct, f64::max)
}
