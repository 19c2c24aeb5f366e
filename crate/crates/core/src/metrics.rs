//! Count and set-agreement measures over tokenizer outputs.
//!
//! Token identity is the exact, case-sensitive token string.

use std::collections::{BTreeSet, HashSet};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// Token types (`unique`) and token occurrences (`total`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CountPair {
    pub unique: usize,
    pub total: usize,
}

impl std::fmt::Display for CountPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.unique, self.total)
    }
}

pub fn token_counts<S: AsRef<str>>(tokens: &[S]) -> CountPair {
    let unique: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    CountPair {
        unique: unique.len(),
        total: tokens.len(),
    }
}

pub fn corpus_counts<S: AsRef<str>>(docs: &[Vec<S>]) -> CountPair {
    let unique: HashSet<&str> = docs.iter().flatten().map(AsRef::as_ref).collect();
    CountPair {
        unique: unique.len(),
        total: docs.iter().map(Vec::len).sum(),
    }
}

/// `|a ∩ b| / |a ∪ b|`, with two empty sets scoring 1.0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Number of distinct sequences among `outputs`.
pub fn distinct_outputs<T: Eq + Hash>(outputs: &[Vec<T>]) -> usize {
    outputs.iter().collect::<HashSet<_>>().len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == row)?;
        let j = self.labels.iter().position(|l| l == col)?;
        Some(self.values[i][j])
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.values[i][j] == self.values[j][i]))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.len()).all(|i| self.values[i][i] == 1.0)
    }
}

/// Pairwise Jaccard over per-profile vocabularies, in the given label order.
pub fn jaccard_matrix<L, T>(per_profile_vocab: &[(L, BTreeSet<T>)]) -> SimilarityMatrix
where
    L: AsRef<str>,
    T: Ord,
{
    let n = per_profile_vocab.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = jaccard(&per_profile_vocab[i].1, &per_profile_vocab[j].1);
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    SimilarityMatrix {
        labels: per_profile_vocab.iter().map(|(l, _)| l.as_ref().to_string()).collect(),
        values,
    }
}

/// Per-sentence Jaccard averaged over sentences. `outputs[p][s]` holds the
/// tokens of profile `p` on sentence `s`.
pub fn jaccard_matrix_per_sentence<L: AsRef<str>>(labels: &[L], outputs: &[Vec<Vec<String>>]) -> SimilarityMatrix {
    let n = labels.len();
    let sentences = outputs.first().map_or(0, Vec::len);
    let sets: Vec<Vec<BTreeSet<&str>>> = outputs
        .iter()
        .map(|docs| docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect())
        .collect();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if sentences == 0 {
                1.0
            } else {
                (0..sentences).map(|s| jaccard(&sets[i][s], &sets[j][s])).sum::<f64>() / sentences as f64
            };
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    SimilarityMatrix {
        labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
        values,
    }
}
