//! Word lists driving the coarse tagger, stop-word marking and lemmatization.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

const DEFAULT_STOP_WORDS: &str = include_str!("../../resources/stopwords.txt");
const DEFAULT_LEMMAS: &str = include_str!("../../resources/lemmas.tsv");

const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "under", "into", "onto", "about",
    "than", "between", "after", "before", "during", "over", "within", "without", "per", "across",
    "through", "among", "via", "above", "below",
];

/// Function words that are neither stop words nor content: conjunctions,
/// quantity/comparison triggers and words that talk about the database itself.
const FUNCTION_WORDS: &[&str] = &[
    "and",
    "or",
    "but",
    "nor",
    "if",
    "where",
    "whenever",
    "when",
    "while",
    "also",
    "then",
    "only",
    "just",
    "too",
    "ever",
    "more",
    "less",
    "fewer",
    "most",
    "least",
    "top",
    "not",
    "no",
    "how",
    "many",
    "much",
    "there",
    "here",
    "whose",
    "greater",
    "larger",
    "higher",
    "lower",
    "smaller",
    "exactly",
    "equal",
    "database",
    "table",
    "column",
    "row",
    "entry",
    "information",
    "detail",
    "everything",
    "anything",
    "something",
    "other",
    "own",
    "else",
];

/// Imperative verbs that name the retrieval action rather than data.
const COMMAND_WORDS: &[&str] = &[
    "show", "list", "print", "get", "output", "give", "display", "find", "tell", "fetch",
    "retrieve", "return", "select", "want", "need", "see",
];

const VERBS: &[&str] = &[
    "record",
    "compose",
    "distribute",
    "chart",
    "sell",
    "rank",
    "release",
    "write",
    "sing",
    "play",
    "produce",
    "perform",
    "sign",
    "publish",
    "buy",
    "make",
    "win",
    "lead",
    "run",
    "take",
    "go",
    "know",
    "like",
    "appear",
    "belong",
    "contain",
    "include",
    "hold",
    "charted",
    "ranked",
    "recorded",
    "composed",
    "distributed",
];

const ADJECTIVES: &[&str] = &[
    "different",
    "same",
    "new",
    "old",
    "best",
    "worst",
    "first",
    "last",
    "big",
    "small",
    "good",
    "famous",
    "popular",
    "total",
    "average",
    "maximum",
    "minimum",
    "highest",
    "lowest",
];

/// Plain-text stop list: one entry per line, `#` starts a comment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Self { words }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for StopWords {
    fn default() -> Self {
        Self::parse(DEFAULT_STOP_WORDS)
    }
}

/// Irregular forms (`are -> be`) loaded from a tab-separated file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaExceptions {
    map: HashMap<String, String>,
}

impl LemmaExceptions {
    pub fn parse(text: &str) -> Self {
        let map = text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .filter_map(|l| {
                let mut parts = l.split('\t');
                let surface = parts.next()?.trim().to_lowercase();
                let lemma = parts.next()?.trim().to_lowercase();
                (!surface.is_empty() && !lemma.is_empty()).then_some((surface, lemma))
            })
            .collect();
        Self { map }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.map.get(word).map(String::as_str)
    }
}

impl Default for LemmaExceptions {
    fn default() -> Self {
        Self::parse(DEFAULT_LEMMAS)
    }
}

pub fn is_preposition(lemma: &str) -> bool {
    PREPOSITIONS.contains(&lemma)
}

pub fn is_function_word(lemma: &str) -> bool {
    FUNCTION_WORDS.contains(&lemma)
}

/// Data-retrieval commands such as "show" or "list".
pub fn is_command_word(lemma: &str) -> bool {
    COMMAND_WORDS.contains(&lemma)
}

pub fn is_known_verb(lemma: &str) -> bool {
    VERBS.contains(&lemma)
}

pub fn is_adjective(lemma: &str) -> bool {
    ADJECTIVES.contains(&lemma)
}

/// "all"/"every" style quantifiers that mark division queries.
pub fn is_universal_quantifier(lemma: &str) -> bool {
    matches!(lemma, "all" | "every")
}

pub fn is_possessive_determiner(lemma: &str) -> bool {
    matches!(
        lemma,
        "their" | "its" | "his" | "her" | "our" | "my" | "your"
    )
}

pub fn is_relative_pronoun(lemma: &str) -> bool {
    matches!(lemma, "who" | "that" | "which" | "whose")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lists_load() {
        let stop = StopWords::default();
        assert!(stop.contains("the"));
        assert!(stop.contains("Me"));
        assert!(!stop.contains("tracks"));
        let lemmas = LemmaExceptions::default();
        assert_eq!(lemmas.get("are"), Some("be"));
        assert_eq!(lemmas.get("sold"), Some("sell"));
    }

    #[test]
    fn parse_ignores_comments_and_blanks() {
        let stop = StopWords::parse("# header\nfoo\n\n  Bar  # trailing\n");
        assert_eq!(stop.len(), 2);
        assert!(stop.contains("bar"));
        let lemmas = LemmaExceptions::parse("# c\nmice\tmouse\nbroken line\n");
        assert_eq!(lemmas.get("mice"), Some("mouse"));
        assert_eq!(lemmas.get("broken line"), None);
    }
}
