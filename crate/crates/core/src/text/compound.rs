use super::{Compound, CompoundKind, Tag, TaggedQuery, Token, TokenKind};

/// Schema knowledge the compound joiner consults.
pub trait CompoundLexicon {
    /// Whether some cell of the database holds this text (case-insensitive).
    fn is_known_value(&self, phrase: &str) -> bool;
    /// Whether two adjacent lemmas jointly spell one column name.
    fn joins_column(&self, first: &str, second: &str) -> bool;
}

/// A lexicon that knows nothing; only capitalized runs are merged.
pub struct NoLexicon;

impl CompoundLexicon for NoLexicon {
    fn is_known_value(&self, _: &str) -> bool {
        false
    }

    fn joins_column(&self, _: &str, _: &str) -> bool {
        false
    }
}

/// Connector words may sit inside a known value ("Gone is Gone") but never
/// start or end one. Bounded so a stray capital cannot swallow the sentence.
const MAX_EXTENSION: usize = 4;

/// Merges capitalized runs into entity tokens and adjacent word pairs that
/// spell a column name into one term. Positions are preserved; a merged
/// token keeps the position of its first word and records the last one in
/// `end_position`.
pub fn join_compounds(
    text: &str,
    tokens: Vec<Token>,
    lexicon: &dyn CompoundLexicon,
) -> TaggedQuery {
    let mut tokens = tokens;
    clear_sentence_initial(&mut tokens);
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    let mut compounds = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if let Some(j) = entity_end(text, &tokens, i, lexicon) {
            let merged = merge(text, &tokens[i..=j], Tag::Literal);
            if j > i {
                compounds.push(Compound {
                    start: merged.position,
                    end: merged.end_position,
                    kind: CompoundKind::Entity,
                    text: merged.phrase.clone(),
                });
            }
            out.push(merged);
            i = j + 1;
            continue;
        }
        if i + 1 < tokens.len() && pairable(&tokens[i]) && pairable(&tokens[i + 1]) {
            let (a, b) = (&tokens[i], &tokens[i + 1]);
            if lexicon.joins_column(&a.lemma, &b.lemma) {
                let mut merged = merge(text, &tokens[i..=i + 1], Tag::Noun);
                merged.lemma = format!("{}{}", a.lemma, b.lemma);
                merged.surface = merged.phrase.clone();
                compounds.push(Compound {
                    start: merged.position,
                    end: merged.end_position,
                    kind: CompoundKind::ColumnPair,
                    text: merged.phrase.clone(),
                });
                out.push(merged);
                i += 2;
                continue;
            }
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    TaggedQuery {
        original: text.to_string(),
        tokens: out,
        compounds,
    }
}

fn clear_sentence_initial(tokens: &mut [Token]) {
    for k in 1..tokens.len() {
        let prev = &tokens[k - 1];
        if prev.kind == TokenKind::Punctuation && matches!(prev.surface.as_str(), "." | "!" | "?") {
            tokens[k].proper = false;
        }
    }
}

fn pairable(t: &Token) -> bool {
    t.kind == TokenKind::Word
        && !t.proper
        && matches!(t.tag, Tag::Noun | Tag::Verb | Tag::Adjective)
}

fn is_proper(t: &Token) -> bool {
    t.kind == TokenKind::Word && t.proper && t.tag != Tag::Stop
}

fn span<'a>(text: &'a str, run: &[Token]) -> &'a str {
    let first = &run[0];
    let last = &run[run.len() - 1];
    let end = last.offset + last.surface_len();
    &text[first.offset..end.min(text.len())]
}

/// End index of the entity starting at `i`, if one starts there.
fn entity_end(
    text: &str,
    tokens: &[Token],
    i: usize,
    lexicon: &dyn CompoundLexicon,
) -> Option<usize> {
    if !is_proper(&tokens[i]) {
        return None;
    }
    let mut j = i;
    while j + 1 < tokens.len() && is_proper(&tokens[j + 1]) {
        j += 1;
    }
    // Try to reach a later capitalized word through lowercase connectors
    // when the whole phrase is a value stored in the database.
    let limit = (j + 1 + MAX_EXTENSION).min(tokens.len() - 1);
    for k in (j + 2..=limit).rev() {
        let run = &tokens[i..=k];
        if is_proper(&tokens[k])
            && run.iter().all(|t| t.kind == TokenKind::Word)
            && lexicon.is_known_value(span(text, run))
        {
            return Some(k);
        }
    }
    Some(j)
}

fn merge(text: &str, run: &[Token], tag: Tag) -> Token {
    let first = &run[0];
    let last = &run[run.len() - 1];
    if run.len() == 1 {
        let mut t = first.clone();
        t.tag = tag;
        return t;
    }
    let phrase = span(text, run).to_string();
    let surface: String = run.iter().map(|t| t.surface.as_str()).collect();
    Token {
        lemma: surface.to_lowercase(),
        surface,
        position: first.position,
        end_position: last.end_position,
        kind: TokenKind::Word,
        tag,
        numeric_value: None,
        offset: first.offset,
        phrase,
        proper: first.proper,
    }
}

impl Token {
    fn surface_len(&self) -> usize {
        // Quantity merging rewrites the surface ("2 million"), so the span
        // length comes from the phrase, which mirrors the source text.
        self.phrase.len()
    }
}
