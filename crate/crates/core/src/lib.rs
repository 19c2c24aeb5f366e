//! Tokenizers for biomedical text and a harness for comparing them.
//!
//! Three strategies share one output type, [`TokenizedSentence`]: plain
//! whitespace splitting, regex rule sets (prefix / suffix / infix splits with
//! special cases and protected patterns), and a character tagger that labels
//! every character `B`, `I`, `E` or `O`. Around them sit normalization,
//! count and Jaccard metrics, sparse document-term and co-occurrence
//! matrices, and a fixture-diffing evaluation harness.
//!
//! ```
//! use biotok::{builtin_profile, tokenize_rules, tokenize_whitespace};
//!
//! let text = "Normal chest x-ray.";
//! assert_eq!(tokenize_whitespace(text).texts(), ["Normal", "chest", "x-ray."]);
//!
//! let ptb = builtin_profile("ptb").unwrap();
//! assert_eq!(tokenize_rules(text, &ptb).texts(), ["Normal", "chest", "x-ray", "."]);
//! ```

pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod rules;
pub mod tagger;
pub mod vectorize;
pub mod whitespace;

pub use error::{Error, Result};
pub use harness::{evaluate, resolve_profile, EvalReport, Targets, Tokenizer};
pub use metrics::{corpus_counts, distinct_outputs, jaccard, jaccard_matrix, token_counts, CountPair, SimilarityMatrix};
pub use model::{GoldenFixture, Sentence, Strategy, Token, TokenizedSentence, TokenizerProfile};
pub use normalize::{normalize, normalize_corpus, CaseFold, NormalizationConfig};
pub use rules::{builtin_profile, tokenize_rules, trace, RuleSet, RuleSetSpec, RuleTrace};
pub use tagger::{decode_tags, derive_tags, tokenize_tagged, train, CharTag, TagPredictor, TaggerModel, TrainingConfig};
pub use vectorize::{build_dtm, build_tcm, build_vocab, DocumentTermMatrix, TermCooccurrenceMatrix, Vocabulary};
pub use whitespace::tokenize_whitespace;

/// The benchmark corpus, golden fixtures and reference targets shipped with
/// the crate.
pub mod data {
    use crate::harness::{KnownDeviation, Targets};
    use crate::model::{parse_corpus, parse_fixtures, GoldenFixture, Sentence};

    pub const CORPUS_JSONL: &str = include_str!("../data/corpus.jsonl");
    pub const FIXTURES_JSONL: &str = include_str!("../data/fixtures.jsonl");
    pub const TARGETS_JSON: &str = include_str!("../data/targets.json");
    pub const KNOWN_DEVIATIONS_JSON: &str = include_str!("../data/known_deviations.json");

    pub fn corpus() -> Vec<Sentence> {
        parse_corpus(CORPUS_JSONL).expect("shipped corpus parses")
    }

    pub fn fixtures() -> Vec<GoldenFixture> {
        parse_fixtures(FIXTURES_JSONL).expect("shipped fixtures parse")
    }

    pub fn targets() -> Targets {
        Targets::from_json(TARGETS_JSON).expect("shipped targets parse")
    }

    pub fn known_deviations() -> Vec<KnownDeviation> {
        serde_json::from_str(KNOWN_DEVIATIONS_JSON).expect("shipped deviation list parses")
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/whitespace.md")]
    mod whitespace {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/tagger.md")]
    mod tagger {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/vectorize.md")]
    mod vectorize {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
