//! English query preprocessing: tokens, lemmas, coarse tags, stop words,
//! scaled quantities and joined compounds.

mod compound;
pub mod lemma;
pub mod lexicon;
mod quantity;
mod tokenize;

use serde::Serialize;
use thiserror::Error;

use crate::value::Value;

pub use compound::{join_compounds, CompoundLexicon, NoLexicon};
pub use lemma::Lemmatizer;
pub use lexicon::{LemmaExceptions, StopWords};
pub use quantity::parse_quantity;
pub use tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("the query is empty")]
    EmptyQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Word,
    Number,
    QuotedLiteral,
    Punctuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Noun,
    Verb,
    Adjective,
    Preposition,
    Stop,
    Literal,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Token {
    /// Text as written. Merged compounds use the joined form ("SanFrancisco").
    pub surface: String,
    pub lemma: String,
    /// 1-based index into the tokenized sentence.
    pub position: usize,
    /// Last position covered; equals `position` unless tokens were merged.
    pub end_position: usize,
    pub kind: TokenKind,
    pub tag: Tag,
    pub numeric_value: Option<Value>,
    /// Byte offset of the covered span in the original text.
    pub offset: usize,
    /// The covered span of the original text ("San Francisco").
    pub phrase: String,
    /// Capitalized and not sentence-initial.
    pub proper: bool,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn is_content(&self) -> bool {
        !matches!(self.kind, TokenKind::Punctuation) && self.tag != Tag::Stop
    }

    /// The literal value this token denotes, if it is a literal.
    pub fn literal_value(&self) -> Option<Value> {
        match self.kind {
            TokenKind::Number => self.numeric_value.clone(),
            TokenKind::QuotedLiteral => Some(Value::Text(unquote(&self.surface))),
            TokenKind::Word if self.tag == Tag::Literal => Some(Value::Text(self.phrase.clone())),
            _ => None,
        }
    }

    pub fn is_command(&self) -> bool {
        self.is_word() && lexicon::is_command_word(&self.lemma)
    }
}

pub(crate) fn unquote(s: &str) -> String {
    let mut chars = s.chars();
    chars.next();
    chars.next_back();
    chars.as_str().to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompoundKind {
    /// A capitalized run such as a person or company name.
    Entity,
    /// Two words that jointly spell one column name ("track id").
    ColumnPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Compound {
    pub start: usize,
    pub end: usize,
    pub kind: CompoundKind,
    pub text: String,
}

/// The analyzed query handed to the matcher.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedQuery {
    pub original: String,
    pub tokens: Vec<Token>,
    pub compounds: Vec<Compound>,
}

impl TaggedQuery {
    pub fn token_at(&self, position: usize) -> Option<&Token> {
        self.tokens.iter().find(|t| t.position == position)
    }

    pub fn index_of(&self, position: usize) -> Option<usize> {
        self.tokens.iter().position(|t| t.position == position)
    }
}

/// Stop list plus lemmatizer; both come from editable config files.
#[derive(Debug, Clone, Default)]
pub struct TextConfig {
    pub stop_words: StopWords,
    pub lemmatizer: Lemmatizer,
}

pub fn lemmatize(mut token: Token, lemmatizer: &Lemmatizer) -> Token {
    if token.kind == TokenKind::Word {
        token.lemma = lemmatizer.lemma(&token.surface);
    }
    token
}

/// Assigns the coarse lexical tag from the lemma.
pub fn tag(mut token: Token) -> Token {
    token.tag = match token.kind {
        TokenKind::Number | TokenKind::QuotedLiteral => Tag::Literal,
        TokenKind::Punctuation => Tag::Other,
        TokenKind::Word => {
            let lemma = token.lemma.as_str();
            let lower = token.surface.to_lowercase();
            if lexicon::is_preposition(lemma) {
                Tag::Preposition
            } else if lexicon::is_function_word(lemma) {
                Tag::Other
            } else if lexicon::is_command_word(lemma) || lexicon::is_known_verb(lemma) {
                Tag::Verb
            } else if lexicon::is_adjective(&lower) || lexicon::is_adjective(lemma) {
                Tag::Adjective
            } else if lemma != lower && (lower.ends_with("ed") || lower.ends_with("ing")) {
                Tag::Verb
            } else {
                Tag::Noun
            }
        }
    };
    token
}

pub fn mark_stop_words(tokens: Vec<Token>, stop: &StopWords) -> Vec<Token> {
    tokens
        .into_iter()
        .map(|mut t| {
            if t.kind == TokenKind::Word && (stop.contains(&t.lemma) || stop.contains(&t.surface)) {
                t.tag = Tag::Stop;
                t.proper = false;
            }
            t
        })
        .collect()
}

/// Full pipeline: tokenize, scale quantities, lemmatize, tag, mark stop
/// words and join compounds.
pub fn analyze(
    text: &str,
    config: &TextConfig,
    lexicon: &dyn CompoundLexicon,
) -> Result<TaggedQuery, TextError> {
    let tokens = tokenize(text)?;
    let tokens: Vec<Token> = tokens
        .into_iter()
        .map(|t| lemmatize(t, &config.lemmatizer))
        .collect();
    let tokens = parse_quantity(tokens);
    let tokens: Vec<Token> = tokens.into_iter().map(tag).collect();
    let tokens = mark_stop_words(tokens, &config.stop_words);
    Ok(join_compounds(text, tokens, lexicon))
}
