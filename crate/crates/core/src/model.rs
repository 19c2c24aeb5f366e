//! Shared data types: sentences, tokens, tokenizer profiles and golden fixtures,
//! plus the JSON Lines loaders for corpus and fixture files.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Profile names that may appear in a fixtures file.
///
/// The first eight are the columns of the shipped fixture set; `tagger` names
/// the character tagger when its outputs are recorded as fixtures.
pub const KNOWN_PROFILES: &[&str] = &[
    "whitespace",
    "ptb",
    "web",
    "biomed",
    "neural",
    "neural_bio",
    "r_basic",
    "neural_gru",
    "tagger",
];

/// One input sentence of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub text: String,
}

/// A contiguous span of a source string. `start..end` are byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    /// Builds the token covering `source[start..end]`.
    pub fn from_span(source: &str, start: usize, end: usize) -> Self {
        Token {
            text: source[start..end].to_string(),
            start,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedSentence {
    pub sentence_id: String,
    pub profile: String,
    pub tokens: Vec<Token>,
}

impl TokenizedSentence {
    pub fn new(profile: impl Into<String>, tokens: Vec<Token>) -> Self {
        TokenizedSentence {
            sentence_id: String::new(),
            profile: profile.into(),
            tokens,
        }
    }

    /// Recovers spans for token strings that partition the non-whitespace
    /// text of `source` in order, e.g. a fixture row.
    pub fn align<S: AsRef<str>>(source: &str, profile: impl Into<String>, tokens: &[S]) -> Result<Self> {
        let mut pos = 0;
        let mut out = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let tok = tok.as_ref();
            pos += source[pos..].len() - source[pos..].trim_start().len();
            if tok.is_empty() || !source[pos..].starts_with(tok) {
                return Err(Error::Validation(format!(
                    "token {i} {tok:?} does not continue the source at byte {pos}"
                )));
            }
            out.push(Token::from_span(source, pos, pos + tok.len()));
            pos += tok.len();
        }
        if !source[pos..].trim().is_empty() {
            return Err(Error::Validation(format!("source text after byte {pos} is not covered")));
        }
        Ok(TokenizedSentence::new(profile, out))
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.sentence_id = id.into();
        self
    }

    pub fn texts(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks ordering, non-overlap and verbatim text against `source`.
    ///
    /// Coverage is checked separately by [`TokenizedSentence::check_coverage`]
    /// because decoded tagger output may legitimately leave characters
    /// uncovered.
    pub fn check_spans(&self, source: &str) -> Result<()> {
        let mut last_end = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.start >= tok.end || tok.end > source.len() {
                return Err(Error::Validation(format!(
                    "token {i} has invalid span {}..{} for source of {} bytes",
                    tok.start,
                    tok.end,
                    source.len()
                )));
            }
            if tok.start < last_end {
                return Err(Error::Validation(format!(
                    "token {i} at {} overlaps or precedes the previous token ending at {last_end}",
                    tok.start
                )));
            }
            match source.get(tok.start..tok.end) {
                Some(s) if s == tok.text => {}
                _ => {
                    return Err(Error::Validation(format!(
                        "token {i} text {:?} does not match source span {}..{}",
                        tok.text, tok.start, tok.end
                    )))
                }
            }
            last_end = tok.end;
        }
        Ok(())
    }

    /// Checks that every non-whitespace character is inside a token and that
    /// no token contains whitespace.
    pub fn check_coverage(&self, source: &str) -> Result<()> {
        let mut tokens = self.tokens.iter().peekable();
        for (pos, ch) in source.char_indices() {
            while tokens.peek().is_some_and(|t| t.end <= pos) {
                tokens.next();
            }
            let covered = tokens.peek().is_some_and(|t| t.start <= pos);
            if ch.is_whitespace() && covered {
                return Err(Error::Validation(format!(
                    "whitespace at byte {pos} is inside a token"
                )));
            }
            if !ch.is_whitespace() && !covered {
                return Err(Error::Validation(format!(
                    "character {ch:?} at byte {pos} is not covered by any token"
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self, source: &str) -> Result<()> {
        self.check_spans(source)?;
        self.check_coverage(source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Whitespace,
    Rules,
    CharTagger,
}

/// Declarative selection of a tokenization strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerProfile {
    pub name: String,
    pub strategy: Strategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ruleset_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_ref: Option<PathBuf>,
}

impl TokenizerProfile {
    pub fn new(
        name: impl Into<String>,
        strategy: Strategy,
        ruleset_ref: Option<String>,
        model_ref: Option<PathBuf>,
    ) -> Result<Self> {
        let profile = TokenizerProfile {
            name: name.into(),
            strategy,
            ruleset_ref,
            model_ref,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        match self.strategy {
            Strategy::Rules if self.ruleset_ref.is_none() => Err(Error::Validation(format!(
                "profile `{}` uses the rules strategy but names no ruleset",
                self.name
            ))),
            Strategy::CharTagger if self.model_ref.is_none() => Err(Error::Validation(format!(
                "profile `{}` uses the char tagger strategy but names no model",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

/// Expected output of one profile on one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub sentence_id: String,
    pub profile: String,
    #[serde(rename = "tokens")]
    pub expected_tokens: Vec<String>,
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&raw, path)
}

fn parse_jsonl<T: DeserializeOwned>(raw: &str, path: &Path) -> Result<Vec<(usize, T)>> {
    let mut records = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push((idx + 1, record));
    }
    Ok(records)
}

/// Reads a JSON Lines corpus of `{id, text}` records, in file order.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    corpus_from_records(read_jsonl(path)?)
}

/// Parses corpus records from an in-memory JSON Lines string.
pub fn parse_corpus(raw: &str) -> Result<Vec<Sentence>> {
    corpus_from_records(parse_jsonl(raw, Path::new("<memory>"))?)
}

fn corpus_from_records(records: Vec<(usize, Sentence)>) -> Result<Vec<Sentence>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, sentence) in records {
        if sentence.id.is_empty() {
            return Err(Error::Validation(format!("line {line}: empty sentence id")));
        }
        if !seen.insert(sentence.id.clone()) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate sentence id `{}`",
                sentence.id
            )));
        }
        out.push(sentence);
    }
    Ok(out)
}

/// Reads a JSON Lines fixtures file of `{sentence_id, profile, tokens}` records.
pub fn load_fixtures(path: impl AsRef<Path>) -> Result<Vec<GoldenFixture>> {
    let path = path.as_ref();
    fixtures_from_records(read_jsonl(path)?)
}

pub fn parse_fixtures(raw: &str) -> Result<Vec<GoldenFixture>> {
    fixtures_from_records(parse_jsonl(raw, Path::new("<memory>"))?)
}

fn fixtures_from_records(records: Vec<(usize, GoldenFixture)>) -> Result<Vec<GoldenFixture>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for (line, fixture) in records {
        if !KNOWN_PROFILES.contains(&fixture.profile.as_str()) {
            return Err(Error::Validation(format!(
                "line {line}: unknown profile `{}`",
                fixture.profile
            )));
        }
        if !seen.insert((fixture.sentence_id.clone(), fixture.profile.clone())) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate fixture for ({}, {})",
                fixture.sentence_id, fixture.profile
            )));
        }
        out.push(fixture);
    }
    Ok(out)
}
