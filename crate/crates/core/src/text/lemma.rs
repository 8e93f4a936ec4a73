use super::lexicon::LemmaExceptions;

/// Exception table first, then ordered suffix rules, applied until the word
/// stops changing. Iterating to a fixed point keeps the function idempotent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lemmatizer {
    exceptions: LemmaExceptions,
}

impl Lemmatizer {
    pub fn new(exceptions: LemmaExceptions) -> Self {
        Self { exceptions }
    }

    pub fn lemma(&self, word: &str) -> String {
        let mut current = word.to_lowercase().replace('’', "'");
        for _ in 0..8 {
            let next = self.step(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn step(&self, w: &str) -> String {
        if let Some(l) = self.exceptions.get(w) {
            return l.to_string();
        }
        if let Some(stem) = w.strip_suffix("'s") {
            if !stem.is_empty() {
                return stem.to_string();
            }
        }
        if let Some(stem) = w.strip_suffix('\'') {
            if !stem.is_empty() {
                return stem.to_string();
            }
        }
        if w.contains('\'') || !w.chars().all(|c| c.is_alphabetic()) {
            return w.to_string();
        }
        let n = w.chars().count();
        if n > 4 && w.ends_with("ies") {
            return format!("{}y", &w[..w.len() - 3]);
        }
        if w.ends_with("sses") {
            return w[..w.len() - 2].to_string();
        }
        if n > 4
            && ["ches", "shes", "xes", "zes"]
                .iter()
                .any(|s| w.ends_with(s))
        {
            return w[..w.len() - 2].to_string();
        }
        if n >= 3 && w.ends_with('s') && !["ss", "us", "is", "os"].iter().any(|s| w.ends_with(s)) {
            return w[..w.len() - 1].to_string();
        }
        if n > 5 && w.ends_with("ing") {
            return undouble(&w[..w.len() - 3]);
        }
        if n > 5 && w.ends_with("ed") {
            let stem = &w[..w.len() - 2];
            if let Some(s) = stem.strip_suffix('i') {
                return format!("{s}y");
            }
            return undouble(stem);
        }
        if n > 5 && w.ends_with("ly") {
            return w[..w.len() - 2].to_string();
        }
        w.to_string()
    }
}

/// `runn` -> `run`, `stopp` -> `stop`; keeps `ll`, `ss`, `zz`, `ff`.
fn undouble(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 4 && chars[n - 1] == chars[n - 2] && "bdgmnprt".contains(chars[n - 1]) {
        chars[..n - 1].iter().collect()
    } else {
        stem.to_string()
    }
}
