//! Post-tokenization normalization.
//!
//! Steps run in a fixed order: case folding, punctuation-only drop,
//! numeric-only drop, minimum length, stopwords. Corpus-frequency filtering
//! needs the whole corpus and lives in [`normalize_corpus`].

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseFold {
    #[default]
    None,
    Lower,
    Upper,
}

impl CaseFold {
    pub fn apply(self, s: &str) -> String {
        match self {
            CaseFold::None => s.to_string(),
            CaseFold::Lower => s.to_lowercase(),
            CaseFold::Upper => s.to_uppercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub case_fold: CaseFold,
    pub drop_punct_only: bool,
    pub drop_numeric_only: bool,
    pub min_length: usize,
    /// Compared after case folding; entries are folded the same way.
    pub stopwords: BTreeSet<String>,
    /// Raw occurrence count a token needs across the corpus to survive.
    pub min_corpus_freq: usize,
}

fn is_punct_or_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

/// Every character is Unicode punctuation or a symbol.
pub fn is_punct_only(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punct_or_symbol)
}

/// Decimal digits, optionally with internal `,` or `.` separators.
pub fn is_numeric_only(token: &str) -> bool {
    let is_digit = |c: char| get_general_category(c) == GeneralCategory::DecimalNumber;
    let chars: Vec<char> = token.chars().collect();
    match (chars.first(), chars.last()) {
        (Some(&first), Some(&last)) if is_digit(first) && is_digit(last) => chars
            .iter()
            .all(|&c| is_digit(c) || c == ',' || c == '.'),
        _ => false,
    }
}

pub fn normalize(tokens: &[String], config: &NormalizationConfig) -> Vec<String> {
    let stopwords: BTreeSet<String> = config
        .stopwords
        .iter()
        .map(|s| config.case_fold.apply(s))
        .collect();
    tokens
        .iter()
        .map(|t| config.case_fold.apply(t))
        .filter(|t| !(config.drop_punct_only && is_punct_only(t)))
        .filter(|t| !(config.drop_numeric_only && is_numeric_only(t)))
        .filter(|t| t.chars().count() >= config.min_length)
        .filter(|t| !stopwords.contains(t))
        .collect()
}

pub fn normalize_corpus(docs: &[Vec<String>], config: &NormalizationConfig) -> Vec<Vec<String>> {
    let docs: Vec<Vec<String>> = docs.iter().map(|d| normalize(d, config)).collect();
    if config.min_corpus_freq <= 1 {
        return docs;
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for tok in docs.iter().flatten() {
        *freq.entry(tok).or_default() += 1;
    }
    let keep: BTreeSet<String> = freq
        .into_iter()
        .filter(|&(_, n)| n >= config.min_corpus_freq)
        .map(|(t, _)| t.to_string())
        .collect();
    docs.into_iter()
        .map(|d| d.into_iter().filter(|t| keep.contains(t)).collect())
        .collect()
}

/// Reads a stopword list: one token per line, blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn examples() {
        let lower = NormalizationConfig {
            case_fold: CaseFold::Lower,
            drop_punct_only: true,
            ..Default::default()
        };
        assert_eq!(normalize(&v(&["Normal", "chest", "x-ray."]), &lower), v(&["normal", "chest", "x-ray."]));

        let punct = NormalizationConfig {
            drop_punct_only: true,
            ..Default::default()
        };
        assert_eq!(normalize(&v(&["IL", "-", "10"]), &punct), v(&["IL", "10"]));

        let short = NormalizationConfig {
            min_length: 2,
            stopwords: ["of".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(normalize(&v(&["a", "Ca2+", "of"]), &short), v(&["Ca2+"]));
    }

    #[test]
    fn stopwords_fold_with_tokens() {
        let config = NormalizationConfig {
            case_fold: CaseFold::Lower,
            stopwords: ["The".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(normalize(&v(&["THE", "gene"]), &config), v(&["gene"]));
    }

    #[test]
    fn character_classes() {
        assert!(is_punct_only("-"));
        assert!(is_punct_only("%"));
        assert!(is_punct_only("+"));
        assert!(is_punct_only("“"));
        assert!(!is_punct_only("x-ray"));
        assert!(!is_punct_only(""));
        assert!(is_numeric_only("26,003"));
        assert!(is_numeric_only("0.05"));
        assert!(is_numeric_only("1855"));
        assert!(!is_numeric_only("1/2"));
        assert!(!is_numeric_only("1."));
        assert!(!is_numeric_only("21st"));
        assert!(!is_numeric_only(",1"));
    }

    #[test]
    fn corpus_frequency() {
        let config = NormalizationConfig {
            min_corpus_freq: 2,
            ..Default::default()
        };
        let same = vec![v(&["x"]), v(&["x"])];
        assert_eq!(normalize_corpus(&same, &config), same);
        let diff = vec![v(&["x"]), v(&["y"])];
        assert_eq!(normalize_corpus(&diff, &config), vec![Vec::<String>::new(), Vec::new()]);
    }

    #[test]
    fn stopword_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stop.txt");
        std::fs::write(&path, "of\nthe\n\n").unwrap();
        let words = load_stopwords(&path).unwrap();
        assert_eq!(words.len(), 2);
        assert!(words.contains("the"));
    }

    fn config_strategy() -> impl Strategy<Value = NormalizationConfig> {
        (
            prop_oneof![Just(CaseFold::None), Just(CaseFold::Lower), Just(CaseFold::Upper)],
            any::<bool>(),
            any::<bool>(),
            0usize..4,
            proptest::collection::btree_set("[a-cA-C]{1,2}", 0..3),
        )
            .prop_map(|(case_fold, p, n, min_length, stopwords)| NormalizationConfig {
                case_fold,
                drop_punct_only: p,
                drop_numeric_only: n,
                min_length,
                stopwords,
                min_corpus_freq: 0,
            })
    }

    proptest! {
        #[test]
        fn identity_monotone_idempotent(
            toks in proptest::collection::vec("[a-cA-C0-9.,+-]{1,4}", 0..12),
            config in config_strategy(),
        ) {
            prop_assert_eq!(normalize(&toks, &NormalizationConfig::default()), toks.clone());
            let once = normalize(&toks, &config);
            prop_assert!(once.len() <= toks.len());
            prop_assert_eq!(normalize(&once, &config), once);
        }
    }
}
