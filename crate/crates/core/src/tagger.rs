//! Tokenization as character tagging.
//!
//! Every character is labelled `B` (begins a token), `I` (inside), `E` (ends
//! a token) or `O` (outside any token). A single-character token is a lone
//! `B`. Tokens are recovered from a label sequence by [`decode_tags`], which
//! is total: any sequence of the right length decodes to ordered,
//! non-overlapping spans.
//!
//! The classifier behind [`TaggerModel`] is a greedy left-to-right averaged
//! perceptron over a window of character features (identity, coarse class,
//! class n-grams and the previously predicted label). Whitespace characters
//! are always labelled `O` and every other character is restricted to
//! `B`/`I`/`E`, so predicted tokenizations never drop a visible character.
//! Other backends can plug into the same decoding and evaluation code through
//! [`TagPredictor`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Token, TokenizedSentence};

pub const PROFILE: &str = "tagger";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharTag {
    B,
    I,
    E,
    O,
}

impl CharTag {
    pub const ALL: [CharTag; 4] = [CharTag::B, CharTag::I, CharTag::E, CharTag::O];
    const VISIBLE: [CharTag; 3] = [CharTag::B, CharTag::I, CharTag::E];

    pub fn index(self) -> usize {
        self as usize
    }

    fn symbol(self) -> char {
        match self {
            CharTag::B => 'B',
            CharTag::I => 'I',
            CharTag::E => 'E',
            CharTag::O => 'O',
        }
    }
}

impl fmt::Display for CharTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One tag per character of `text`, derived from a tokenization of it.
pub fn derive_tags(text: &str, tokens: &TokenizedSentence) -> Result<Vec<CharTag>> {
    tokens.check_spans(text)?;
    let mut tags = Vec::with_capacity(text.len());
    let mut toks = tokens.tokens.iter().peekable();
    for (pos, ch) in text.char_indices() {
        while toks.peek().is_some_and(|t| t.end <= pos) {
            toks.next();
        }
        let tag = match toks.peek() {
            Some(t) if t.start <= pos => {
                if pos == t.start {
                    CharTag::B
                } else if pos + ch.len_utf8() == t.end {
                    CharTag::E
                } else {
                    CharTag::I
                }
            }
            _ => CharTag::O,
        };
        tags.push(tag);
    }
    Ok(tags)
}

/// Decodes a tag sequence into token spans.
///
/// Well-formed `B I* E` runs and lone `B`s become tokens. Malformed input is
/// repaired greedily:
/// - an `I` or `E` with no open token opens one;
/// - a whitespace character always closes the open token, whatever its tag;
/// - a non-whitespace `O` continues an open multi-character run, but ends a
///   lone `B` and is otherwise left uncovered;
/// - a token still open at the end closes at the last character.
pub fn decode_tags(text: &str, tags: &[CharTag]) -> Result<TokenizedSentence> {
    let n_chars = text.chars().count();
    if tags.len() != n_chars {
        return Err(Error::Validation(format!(
            "got {} tags for {n_chars} characters",
            tags.len()
        )));
    }

    struct Open {
        start: usize,
        end: usize,
        lone_b: bool,
    }

    let mut tokens = Vec::new();
    let mut open: Option<Open> = None;
    let close = |open: &mut Option<Open>, tokens: &mut Vec<Token>| {
        if let Some(o) = open.take() {
            tokens.push(Token::from_span(text, o.start, o.end));
        }
    };

    for ((pos, ch), &tag) in text.char_indices().zip(tags) {
        let end = pos + ch.len_utf8();
        if ch.is_whitespace() {
            close(&mut open, &mut tokens);
            continue;
        }
        match tag {
            CharTag::B => {
                close(&mut open, &mut tokens);
                open = Some(Open { start: pos, end, lone_b: true });
            }
            CharTag::I => match open.as_mut() {
                Some(o) => {
                    o.end = end;
                    o.lone_b = false;
                }
                None => open = Some(Open { start: pos, end, lone_b: false }),
            },
            CharTag::E => {
                match open.as_mut() {
                    Some(o) => o.end = end,
                    None => open = Some(Open { start: pos, end, lone_b: false }),
                }
                close(&mut open, &mut tokens);
            }
            CharTag::O => match open.as_mut() {
                Some(o) if !o.lone_b => o.end = end,
                _ => close(&mut open, &mut tokens),
            },
        }
    }
    close(&mut open, &mut tokens);
    Ok(TokenizedSentence::new(PROFILE, tokens))
}

/// Anything that can label the characters of a string.
pub trait TagPredictor {
    /// Returns exactly one tag per character of `text`.
    fn predict_tags(&self, text: &str) -> Vec<CharTag>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub window: usize,
    pub seed: u64,
    pub averaged: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 10,
            window: 3,
            seed: 7,
            averaged: true,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Validation("epochs must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Validation("window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub epochs: usize,
    pub averaged: bool,
}

/// A trained windowed linear tagger.
///
/// `weights` is laid out tag-major: `weights[tag * vocab_len + feature_id]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggerModel {
    window: usize,
    feature_vocab: BTreeMap<String, u32>,
    weights: Vec<f64>,
    metadata: ModelMetadata,
}

impl TaggerModel {
    pub fn from_parts(
        window: usize,
        feature_vocab: BTreeMap<String, u32>,
        weights: Vec<f64>,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let model = TaggerModel {
            window,
            feature_vocab,
            weights,
            metadata,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.feature_vocab.len();
        if self.window == 0 {
            return Err(Error::Validation("model window must be at least 1".into()));
        }
        if self.weights.len() != CharTag::ALL.len() * v {
            return Err(Error::Validation(format!(
                "expected {} weights for {v} features, found {}",
                CharTag::ALL.len() * v,
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Validation(format!("non-finite weight {w}")));
        }
        let mut seen = vec![false; v];
        for (feat, &id) in &self.feature_vocab {
            let id = id as usize;
            if id >= v || std::mem::replace(&mut seen[id], true) {
                return Err(Error::Validation(format!(
                    "feature {feat:?} has invalid or repeated id {id}"
                )));
            }
        }
        Ok(())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn feature_vocab(&self) -> &BTreeMap<String, u32> {
        &self.feature_vocab
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn score(&self, feats: &[String], tag: CharTag) -> f64 {
        let v = self.feature_vocab.len();
        feats
            .iter()
            .filter_map(|f| self.feature_vocab.get(f))
            .map(|&id| self.weights[tag.index() * v + id as usize])
            .sum()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string(self).expect("model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let model: TaggerModel = serde_json::from_str(raw)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }

    pub fn tokenize(&self, text: &str) -> TokenizedSentence {
        tokenize_tagged(text, self)
    }
}

impl TagPredictor for TaggerModel {
    fn predict_tags(&self, text: &str) -> Vec<CharTag> {
        let chars: Vec<char> = text.chars().collect();
        let mut tags = Vec::with_capacity(chars.len());
        let mut prev = None;
        for i in 0..chars.len() {
            let tag = if chars[i].is_whitespace() {
                CharTag::O
            } else {
                let feats = features(&chars, i, self.window, prev);
                argmax(|t| self.score(&feats, t))
            };
            tags.push(tag);
            prev = Some(tag);
        }
        tags
    }
}

/// Highest-scoring visible tag; ties go to the earlier of B, I, E.
fn argmax(mut score: impl FnMut(CharTag) -> f64) -> CharTag {
    let mut best = CharTag::B;
    let mut best_score = f64::NEG_INFINITY;
    for tag in CharTag::VISIBLE {
        let s = score(tag);
        if s > best_score {
            best = tag;
            best_score = s;
        }
    }
    best
}

fn char_class(c: Option<char>) -> char {
    match c {
        None => '^',
        Some(c) if c.is_whitespace() => 'S',
        Some(c) if c.is_uppercase() => 'U',
        Some(c) if c.is_lowercase() => 'L',
        Some(c) if c.is_numeric() => 'D',
        Some(c) if c.is_alphabetic() => 'A',
        Some(_) => 'P',
    }
}

fn features(chars: &[char], i: usize, window: usize, prev: Option<CharTag>) -> Vec<String> {
    let at = |d: isize| -> Option<char> {
        let j = i as isize + d;
        (j >= 0).then(|| chars.get(j as usize).copied()).flatten()
    };
    let show = |c: Option<char>| c.map_or_else(|| "^".to_string(), |c| c.to_string());
    let w = window as isize;
    let cls = |d: isize| char_class(at(d));
    let prev = prev.map_or('^', CharTag::symbol);

    let mut f = Vec::with_capacity(4 * window + 12);
    f.push("bias".to_string());
    for d in -w..=w {
        f.push(format!("c{d}={}", show(at(d))));
        f.push(format!("k{d}={}", cls(d)));
    }
    f.push(format!("k-1k0={}{}", cls(-1), cls(0)));
    f.push(format!("k0k1={}{}", cls(0), cls(1)));
    f.push(format!("k-1k0k1={}{}{}", cls(-1), cls(0), cls(1)));
    f.push(format!("k-2k-1k0={}{}{}", cls(-2), cls(-1), cls(0)));
    f.push(format!("k0k1k2={}{}{}", cls(0), cls(1), cls(2)));
    f.push(format!("c-1c0={}{}", show(at(-1)), show(at(0))));
    f.push(format!("c0c1={}{}", show(at(0)), show(at(1))));
    f.push(format!("k-1c0k1={}{}{}", cls(-1), show(at(0)), cls(1)));
    f.push(format!("p={prev}"));
    f.push(format!("p|k0={prev}{}", cls(0)));
    f.push(format!("p|c0={prev}{}", show(at(0))));
    f.push(format!("p|k0k1={prev}{}{}", cls(0), cls(1)));
    f
}

struct Trainer {
    window: usize,
    ids: HashMap<String, u32>,
    weights: Vec<[f64; 4]>,
    totals: Vec<[f64; 4]>,
    stamps: Vec<[u64; 4]>,
    step: u64,
}

impl Trainer {
    fn new(window: usize) -> Self {
        Trainer {
            window,
            ids: HashMap::new(),
            weights: Vec::new(),
            totals: Vec::new(),
            stamps: Vec::new(),
            step: 0,
        }
    }

    fn intern(&mut self, feats: &[String]) -> Vec<u32> {
        feats
            .iter()
            .map(|f| {
                if let Some(&id) = self.ids.get(f) {
                    return id;
                }
                let id = self.weights.len() as u32;
                self.ids.insert(f.clone(), id);
                self.weights.push([0.0; 4]);
                self.totals.push([0.0; 4]);
                self.stamps.push([0; 4]);
                id
            })
            .collect()
    }

    fn bump(&mut self, id: u32, tag: CharTag, delta: f64) {
        let (f, t) = (id as usize, tag.index());
        self.totals[f][t] += (self.step - self.stamps[f][t]) as f64 * self.weights[f][t];
        self.stamps[f][t] = self.step;
        self.weights[f][t] += delta;
    }

    fn sentence(&mut self, chars: &[char], gold: &[CharTag]) {
        let mut prev = None;
        for i in 0..chars.len() {
            if chars[i].is_whitespace() {
                prev = Some(CharTag::O);
                continue;
            }
            let feats = features(chars, i, self.window, prev);
            let ids = self.intern(&feats);
            let pred = argmax(|t| ids.iter().map(|&id| self.weights[id as usize][t.index()]).sum());
            self.step += 1;
            if pred != gold[i] {
                for &id in &ids {
                    self.bump(id, gold[i], 1.0);
                    self.bump(id, pred, -1.0);
                }
            }
            prev = Some(pred);
        }
    }

    fn finish(mut self, config: &TrainingConfig) -> TaggerModel {
        let v = self.weights.len();
        let mut flat = vec![0.0; CharTag::ALL.len() * v];
        for f in 0..v {
            for tag in CharTag::ALL {
                let t = tag.index();
                let w = if config.averaged && self.step > 0 {
                    self.totals[f][t] += (self.step - self.stamps[f][t]) as f64 * self.weights[f][t];
                    self.totals[f][t] / self.step as f64
                } else {
                    self.weights[f][t]
                };
                flat[t * v + f] = w;
            }
        }
        TaggerModel {
            window: self.window,
            feature_vocab: self.ids.into_iter().collect(),
            weights: flat,
            metadata: ModelMetadata {
                seed: config.seed,
                epochs: config.epochs,
                averaged: config.averaged,
            },
        }
    }
}

/// Trains a tagger on `(text, tokenization)` pairs. Deterministic in the seed.
pub fn train(pairs: &[(String, TokenizedSentence)], config: &TrainingConfig) -> Result<TaggerModel> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(Error::Validation("no training pairs".into()));
    }
    let data: Vec<(Vec<char>, Vec<CharTag>)> = pairs
        .iter()
        .map(|(text, toks)| Ok((text.chars().collect(), derive_tags(text, toks)?)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut trainer = Trainer::new(config.window);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (chars, gold) = &data[k];
            trainer.sentence(chars, gold);
        }
    }
    Ok(trainer.finish(config))
}

/// Tokenizes `text` by decoding the model's per-character predictions.
pub fn tokenize_tagged<P: TagPredictor + ?Sized>(text: &str, model: &P) -> TokenizedSentence {
    decode_tags(text, &model.predict_tags(text)).expect("predictor returns one tag per character")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub correct_tags: usize,
    pub total_tags: usize,
    pub matched_spans: usize,
    pub predicted_spans: usize,
    pub gold_spans: usize,
}

impl Tally {
    pub fn merge(&mut self, other: Tally) {
        self.correct_tags += other.correct_tags;
        self.total_tags += other.total_tags;
        self.matched_spans += other.matched_spans;
        self.predicted_spans += other.predicted_spans;
        self.gold_spans += other.gold_spans;
    }

    pub fn scores(&self) -> TaggerScores {
        let tag_accuracy = if self.total_tags == 0 {
            1.0
        } else {
            self.correct_tags as f64 / self.total_tags as f64
        };
        let token_f1 = if self.predicted_spans + self.gold_spans == 0 {
            1.0
        } else {
            2.0 * self.matched_spans as f64 / (self.predicted_spans + self.gold_spans) as f64
        };
        TaggerScores {
            tag_accuracy,
            token_f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggerScores {
    pub tag_accuracy: f64,
    pub token_f1: f64,
}

/// Raw counts behind [`evaluate_tagger`], for pooling across folds.
pub fn tally<P: TagPredictor + ?Sized>(model: &P, pairs: &[(String, TokenizedSentence)]) -> Result<Tally> {
    let mut tally = Tally::default();
    for (text, gold) in pairs {
        let gold_tags = derive_tags(text, gold)?;
        let pred_tags = model.predict_tags(text);
        let predicted = decode_tags(text, &pred_tags)?;
        tally.total_tags += gold_tags.len();
        tally.correct_tags += gold_tags.iter().zip(&pred_tags).filter(|(a, b)| a == b).count();
        let gold_spans: std::collections::HashSet<(usize, usize)> =
            gold.tokens.iter().map(|t| (t.start, t.end)).collect();
        tally.matched_spans += predicted
            .tokens
            .iter()
            .filter(|t| gold_spans.contains(&(t.start, t.end)))
            .count();
        tally.predicted_spans += predicted.len();
        tally.gold_spans += gold.len();
    }
    Ok(tally)
}

/// Tag accuracy over all characters and exact-span token F1.
pub fn evaluate_tagger<P: TagPredictor + ?Sized>(
    model: &P,
    pairs: &[(String, TokenizedSentence)],
) -> Result<TaggerScores> {
    if pairs.is_empty() {
        return Err(Error::Validation("no evaluation pairs".into()));
    }
    Ok(tally(model, pairs)?.scores())
}

/// Trains on all pairs but one, scores the held-out pair, and pools the
/// counts over every choice of held-out pair.
pub fn leave_one_out(pairs: &[(String, TokenizedSentence)], config: &TrainingConfig) -> Result<TaggerScores> {
    if pairs.len() < 2 {
        return Err(Error::Validation("leave-one-out needs at least two pairs".into()));
    }
    let mut pooled = Tally::default();
    for k in 0..pairs.len() {
        let train_set: Vec<_> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, p)| p.clone())
            .collect();
        let model = train(&train_set, config)?;
        pooled.merge(tally(&model, &pairs[k..=k])?);
    }
    Ok(pooled.scores())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Token;
    use CharTag::*;

    fn sentence(text: &str, spans: &[(usize, usize)]) -> TokenizedSentence {
        TokenizedSentence::new(
            "t",
            spans.iter().map(|&(s, e)| Token::from_span(text, s, e)).collect(),
        )
    }

    #[test]
    fn derive_examples() {
        assert_eq!(derive_tags("ab cd", &sentence("ab cd", &[(0, 2), (3, 5)])).unwrap(), [B, E, O, B, E]);
        assert_eq!(derive_tags("a b", &sentence("a b", &[(0, 1), (2, 3)])).unwrap(), [B, O, B]);
        assert_eq!(derive_tags("abcd", &sentence("abcd", &[(0, 4)])).unwrap(), [B, I, I, E]);
    }

    #[test]
    fn derive_rejects_mismatch() {
        let bad = TokenizedSentence::new(
            "t",
            vec![Token {
                text: "zz".into(),
                start: 0,
                end: 2,
            }],
        );
        assert!(derive_tags("ab", &bad).is_err());
    }

    #[test]
    fn derive_counts_chars_not_bytes() {
        let text = "αβ γ";
        let tags = derive_tags(text, &sentence(text, &[(0, 4), (5, 7)])).unwrap();
        assert_eq!(tags, [B, E, O, B]);
    }

    #[test]
    fn decode_examples() {
        assert!(decode_tags("abc def", &[O; 7]).unwrap().is_empty());
        assert_eq!(decode_tags("abc", &[B, I, I]).unwrap().texts(), ["abc"]);
        assert_eq!(decode_tags("abc", &[I, I, E]).unwrap().texts(), ["abc"]);
        assert_eq!(decode_tags("abc", &[E, E, E]).unwrap().texts(), ["a", "b", "c"]);
        assert_eq!(decode_tags("abc", &[B, O, B]).unwrap().texts(), ["a", "c"]);
        assert_eq!(decode_tags("abcd", &[B, I, O, E]).unwrap().texts(), ["abcd"]);
        assert_eq!(decode_tags("a c", &[B, I, E]).unwrap().texts(), ["a", "c"]);
        assert!(decode_tags("abc", &[B, E]).is_err());
    }

    #[test]
    fn single_pair_memorizes() {
        let pairs = vec![("a".to_string(), sentence("a", &[(0, 1)]))];
        let model = train(&pairs, &TrainingConfig::default()).unwrap();
        assert_eq!(model.predict_tags("a"), [B]);
    }

    #[test]
    fn empty_training_rejected() {
        assert!(train(&[], &TrainingConfig::default()).is_err());
        let pairs = vec![("a".to_string(), sentence("a", &[(0, 1)]))];
        let zero = TrainingConfig {
            epochs: 0,
            ..TrainingConfig::default()
        };
        assert!(train(&pairs, &zero).is_err());
        assert!(evaluate_tagger(&train(&pairs, &TrainingConfig::default()).unwrap(), &[]).is_err());
    }

    #[test]
    fn whitespace_only_text() {
        let pairs = vec![("ab c".to_string(), sentence("ab c", &[(0, 2), (3, 4)]))];
        let model = train(&pairs, &TrainingConfig::default()).unwrap();
        assert!(tokenize_tagged(" \t\n ", &model).is_empty());
    }

    #[test]
    fn model_validation() {
        let meta = ModelMetadata {
            seed: 0,
            epochs: 1,
            averaged: false,
        };
        let vocab: BTreeMap<String, u32> = [("bias".to_string(), 0)].into();
        assert!(TaggerModel::from_parts(1, vocab.clone(), vec![0.0; 4], meta.clone()).is_ok());
        assert!(TaggerModel::from_parts(0, vocab.clone(), vec![0.0; 4], meta.clone()).is_err());
        assert!(TaggerModel::from_parts(1, vocab.clone(), vec![0.0; 3], meta.clone()).is_err());
        assert!(TaggerModel::from_parts(1, vocab, vec![f64::NAN, 0.0, 0.0, 0.0], meta.clone()).is_err());
        let bad_id: BTreeMap<String, u32> = [("bias".to_string(), 3)].into();
        assert!(TaggerModel::from_parts(1, bad_id, vec![0.0; 4], meta).is_err());
    }
}
