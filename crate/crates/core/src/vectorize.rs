//! Sparse document-term and term co-occurrence matrices.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    fn insert(&mut self, term: &str) -> usize {
        if let Some(&i) = self.index.get(term) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), i);
        i
    }

    /// One term per line; the line number is the term index.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        for t in &self.terms {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }
}

/// Terms in first-occurrence order.
pub fn build_vocab<S: AsRef<str>>(docs: &[Vec<S>]) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    for tok in docs.iter().flatten() {
        vocab.insert(tok.as_ref());
    }
    vocab
}

/// Writes `row col count` triples, one per line, in key order.
fn write_coo<W: Write>(entries: &BTreeMap<(usize, usize), u64>, mut out: W) -> io::Result<()> {
    for (&(r, c), &n) in entries {
        writeln!(out, "{r} {c} {n}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentTermMatrix {
    pub vocab: Vocabulary,
    pub rows: usize,
    /// `(document, term) -> count`; absent entries are zero.
    pub entries: BTreeMap<(usize, usize), u64>,
}

impl DocumentTermMatrix {
    pub fn get(&self, doc: usize, term: &str) -> u64 {
        self.vocab
            .get(term)
            .and_then(|v| self.entries.get(&(doc, v)))
            .copied()
            .unwrap_or(0)
    }

    pub fn row_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.rows];
        for (&(d, _), &n) in &self.entries {
            sums[d] += n;
        }
        sums
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn write_coo<W: Write>(&self, out: W) -> io::Result<()> {
        write_coo(&self.entries, out)
    }
}

pub fn build_dtm<S: AsRef<str>>(docs: &[Vec<S>]) -> DocumentTermMatrix {
    let vocab = build_vocab(docs);
    let mut entries = BTreeMap::new();
    for (d, doc) in docs.iter().enumerate() {
        for tok in doc {
            let v = vocab.get(tok.as_ref()).expect("term is in vocabulary");
            *entries.entry((d, v)).or_insert(0) += 1;
        }
    }
    DocumentTermMatrix {
        vocab,
        rows: docs.len(),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermCooccurrenceMatrix {
    pub vocab: Vocabulary,
    pub window: usize,
    /// `(term, term) -> count`; symmetric with an empty diagonal.
    pub entries: BTreeMap<(usize, usize), u64>,
}

impl TermCooccurrenceMatrix {
    pub fn get(&self, a: &str, b: &str) -> u64 {
        match (self.vocab.get(a), self.vocab.get(b)) {
            (Some(i), Some(j)) => self.entries.get(&(i, j)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn write_coo<W: Write>(&self, out: W) -> io::Result<()> {
        write_coo(&self.entries, out)
    }
}

/// Counts every pair of positions at most `window` apart within a document,
/// in both directions. Pairs of the same term are not counted.
pub fn build_tcm<S: AsRef<str>>(docs: &[Vec<S>], window: usize) -> Result<TermCooccurrenceMatrix> {
    if window == 0 {
        return Err(Error::Validation("co-occurrence window must be at least 1".into()));
    }
    let vocab = build_vocab(docs);
    let mut entries = BTreeMap::new();
    for doc in docs {
        let ids: Vec<usize> = doc
            .iter()
            .map(|t| vocab.get(t.as_ref()).expect("term is in vocabulary"))
            .collect();
        for (p, &i) in ids.iter().enumerate() {
            for &j in ids.iter().skip(p + 1).take(window) {
                if i != j {
                    *entries.entry((i, j)).or_insert(0) += 1;
                    *entries.entry((j, i)).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(TermCooccurrenceMatrix {
        vocab,
        window,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vocab_order() {
        let v = build_vocab(&[vec!["b", "a"], vec!["a", "c"]]);
        assert_eq!(v.terms(), ["b", "a", "c"]);
        assert!(build_vocab::<&str>(&[]).is_empty());
    }

    #[test]
    fn dtm_examples() {
        let m = build_dtm(&[vec!["a", "b", "a"]]);
        assert_eq!(m.row_sums(), [3]);
        assert_eq!(m.get(0, "a"), 2);
        let empty = build_dtm::<&str>(&[]);
        assert_eq!(empty.rows, 0);
        assert!(empty.entries.is_empty());
    }

    #[test]
    fn tcm_examples() {
        let m = build_tcm(&[vec!["a", "b"]], 1).unwrap();
        assert_eq!(m.get("a", "b"), 1);
        assert_eq!(m.get("b", "a"), 1);

        let m = build_tcm(&[vec!["a", "b", "c"]], 2).unwrap();
        assert_eq!((m.get("a", "c"), m.get("a", "b"), m.get("b", "c")), (1, 1, 1));
        assert_eq!(m.get("c", "a"), 1);

        let m = build_tcm(&[vec!["a", "b", "c"]], 1).unwrap();
        assert_eq!(m.get("a", "c"), 0);

        assert!(build_tcm(&[vec!["a"]], 0).is_err());
    }

    #[test]
    fn coo_output() {
        let m = build_dtm(&[vec!["a", "b", "a"], vec!["b"]]);
        let mut buf = Vec::new();
        m.write_coo(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0 2\n0 1 1\n1 1 1\n");
        let mut buf = Vec::new();
        m.vocab.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a\nb\n");
    }

    proptest! {
        #[test]
        fn tcm_symmetric_zero_diagonal(
            docs in proptest::collection::vec(proptest::collection::vec("[a-d]", 0..8), 0..4),
            window in 1usize..4,
        ) {
            let m = build_tcm(&docs, window).unwrap();
            for (&(i, j), &n) in &m.entries {
                prop_assert_ne!(i, j);
                prop_assert_eq!(m.entries.get(&(j, i)), Some(&n));
            }
            let dtm = build_dtm(&docs);
            let lens: Vec<u64> = docs.iter().map(|d| d.len() as u64).collect();
            prop_assert_eq!(dtm.row_sums(), lens);
        }
    }
}
