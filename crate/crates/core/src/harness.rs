//! Differential evaluation: run profiles over a corpus, diff against golden
//! fixtures, and recompute per-example counts and the vocabulary Jaccard
//! matrix next to the reference targets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data;
use crate::error::{Error, Result};
use crate::metrics::{corpus_counts, distinct_outputs, jaccard_matrix, token_counts, CountPair, SimilarityMatrix};
use crate::model::{GoldenFixture, Sentence, TokenizedSentence};
use crate::rules::{self, builtin_profile, RuleSet};
use crate::tagger::{self, TaggerModel, TrainingConfig};
use crate::whitespace;

/// Similarity cells within this distance of their target count as reproduced.
pub const SIMILARITY_TOLERANCE: f64 = 0.01;

/// A runnable tokenizer.
#[derive(Debug, Clone)]
pub enum Tokenizer {
    Whitespace,
    Rules(RuleSet),
    Tagger(TaggerModel),
}

impl Tokenizer {
    pub fn name(&self) -> &str {
        match self {
            Tokenizer::Whitespace => whitespace::PROFILE,
            Tokenizer::Rules(r) => r.name(),
            Tokenizer::Tagger(_) => tagger::PROFILE,
        }
    }

    pub fn tokenize(&self, text: &str) -> TokenizedSentence {
        match self {
            Tokenizer::Whitespace => whitespace::tokenize_whitespace(text),
            Tokenizer::Rules(r) => rules::tokenize_rules(text, r),
            Tokenizer::Tagger(m) => tagger::tokenize_tagged(text, m),
        }
    }
}

/// Names accepted by [`resolve_profile`] without a file path.
pub fn runnable_profiles() -> Vec<String> {
    let mut names = vec![whitespace::PROFILE.to_string()];
    names.extend(rules::BUILTIN_PROFILES.iter().map(|s| s.to_string()));
    names.push(tagger::PROFILE.to_string());
    names
}

/// Resolves a profile name: `whitespace`, a built-in rule set, `tagger` (the
/// default model trained on the shipped corpus), or a path to a rule-set or
/// model JSON file.
pub fn resolve_profile(name: &str) -> Result<Tokenizer> {
    if name == whitespace::PROFILE {
        return Ok(Tokenizer::Whitespace);
    }
    if rules::BUILTIN_PROFILES.contains(&name) {
        return Ok(Tokenizer::Rules(builtin_profile(name)?));
    }
    if name == tagger::PROFILE {
        return Ok(Tokenizer::Tagger(default_tagger()?));
    }
    let path = Path::new(name);
    if path.is_file() {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&raw)?;
        return if value.get("window").is_some() {
            Ok(Tokenizer::Tagger(TaggerModel::from_json(&raw)?))
        } else {
            Ok(Tokenizer::Rules(RuleSet::from_json(&raw)?))
        };
    }
    Err(Error::UnknownProfile {
        name: name.to_string(),
        valid: runnable_profiles(),
    })
}

/// Pairs each sentence with its tokenization under `silver`.
pub fn silver_pairs(corpus: &[Sentence], silver: &Tokenizer) -> Vec<(String, TokenizedSentence)> {
    corpus
        .iter()
        .map(|s| (s.text.clone(), silver.tokenize(&s.text).with_id(&s.id)))
        .collect()
}

/// The tagger trained on the shipped corpus with `biomed` silver labels and
/// the default configuration.
pub fn default_tagger() -> Result<TaggerModel> {
    let silver = Tokenizer::Rules(builtin_profile("biomed")?);
    tagger::train(&silver_pairs(&data::corpus(), &silver), &TrainingConfig::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Target {
    pub distinct_outputs: usize,
    pub counts: BTreeMap<String, [usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Targets {
    pub examples: BTreeMap<String, Table2Target>,
    pub corpus: BTreeMap<String, [usize; 2]>,
}

/// Reference counts and similarities to compare recomputed tables against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Targets {
    pub labels: Vec<String>,
    pub table2: Table2Targets,
    pub table3: Vec<Vec<f64>>,
}

impl Targets {
    pub fn from_json(raw: &str) -> Result<Self> {
        let t: Targets = serde_json::from_str(raw)?;
        let n = t.labels.len();
        if t.table3.len() != n || t.table3.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("table3 targets must be {n}x{n}")));
        }
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn similarity(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == row)?;
        let j = self.labels.iter().position(|l| l == col)?;
        Some(self.table3[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownDeviation {
    pub sentence_id: String,
    pub profile: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub sentence_id: String,
    pub distinct_outputs: usize,
    pub counts: Vec<CountPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2 {
    pub labels: Vec<String>,
    pub rows: Vec<Table2Row>,
    pub corpus: Vec<CountPair>,
}

impl Table2 {
    pub fn row(&self, sentence_id: &str) -> Option<&Table2Row> {
        self.rows.iter().find(|r| r.sentence_id == sentence_id)
    }

    pub fn count(&self, sentence_id: &str, label: &str) -> Option<CountPair> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.row(sentence_id)?.counts[j])
    }

    pub fn corpus_count(&self, label: &str) -> Option<CountPair> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.corpus[j])
    }
}

/// Token strings of several profiles over the same sentences.
/// `outputs[p][s]` is profile `p` on sentence `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub sentence_ids: Vec<String>,
    pub labels: Vec<String>,
    pub outputs: Vec<Vec<Vec<String>>>,
}

impl Columns {
    pub fn table2(&self) -> Table2 {
        let rows = self
            .sentence_ids
            .iter()
            .enumerate()
            .map(|(s, id)| {
                let outs: Vec<Vec<String>> = self.outputs.iter().map(|col| col[s].clone()).collect();
                Table2Row {
                    sentence_id: id.clone(),
                    distinct_outputs: distinct_outputs(&outs),
                    counts: outs.iter().map(|o| token_counts(o)).collect(),
                }
            })
            .collect();
        Table2 {
            labels: self.labels.clone(),
            rows,
            corpus: self.outputs.iter().map(|col| corpus_counts(col)).collect(),
        }
    }

    pub fn vocabularies(&self) -> Vec<(String, BTreeSet<String>)> {
        self.labels
            .iter()
            .zip(&self.outputs)
            .map(|(l, col)| (l.clone(), col.iter().flatten().cloned().collect()))
            .collect()
    }

    pub fn table3(&self) -> SimilarityMatrix {
        jaccard_matrix(&self.vocabularies())
    }

    pub fn table3_per_sentence(&self) -> SimilarityMatrix {
        crate::metrics::jaccard_matrix_per_sentence(&self.labels, &self.outputs)
    }
}

/// Builds one column per label from fixture rows, skipping labels that lack
/// a fixture for any sentence.
pub fn fixture_columns(corpus: &[Sentence], fixtures: &[GoldenFixture], labels: &[String]) -> Columns {
    let index = fixture_index(fixtures);
    let mut cols = Columns {
        sentence_ids: corpus.iter().map(|s| s.id.clone()).collect(),
        labels: Vec::new(),
        outputs: Vec::new(),
    };
    for label in labels {
        let col: Option<Vec<Vec<String>>> = corpus
            .iter()
            .map(|s| index.get(&(s.id.as_str(), label.as_str())).map(|f| f.expected_tokens.clone()))
            .collect();
        if let Some(col) = col {
            cols.labels.push(label.clone());
            cols.outputs.push(col);
        }
    }
    cols
}

fn fixture_index(fixtures: &[GoldenFixture]) -> HashMap<(&str, &str), &GoldenFixture> {
    fixtures
        .iter()
        .map(|f| ((f.sentence_id.as_str(), f.profile.as_str()), f))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub table: String,
    pub row: String,
    pub column: String,
    pub target: String,
    pub actual: String,
    pub within_tolerance: bool,
}

/// Cells of the recomputed tables that differ from the targets. Count
/// cells must match exactly; similarity cells are listed when they differ at
/// the targets' three-decimal precision, and flagged when the gap exceeds
/// [`SIMILARITY_TOLERANCE`].
pub fn deltas(table2: &Table2, table3: &SimilarityMatrix, targets: &Targets) -> Vec<Delta> {
    let mut out = Vec::new();
    for row in &table2.rows {
        let Some(target) = targets.table2.examples.get(&row.sentence_id) else {
            continue;
        };
        if row.distinct_outputs != target.distinct_outputs {
            out.push(Delta {
                table: "table2".into(),
                row: row.sentence_id.clone(),
                column: "distinct_outputs".into(),
                target: target.distinct_outputs.to_string(),
                actual: row.distinct_outputs.to_string(),
                within_tolerance: false,
            });
        }
        for (label, actual) in table2.labels.iter().zip(&row.counts) {
            if let Some(&[u, t]) = target.counts.get(label) {
                let want = CountPair { unique: u, total: t };
                if *actual != want {
                    out.push(Delta {
                        table: "table2".into(),
                        row: row.sentence_id.clone(),
                        column: label.clone(),
                        target: want.to_string(),
                        actual: actual.to_string(),
                        within_tolerance: false,
                    });
                }
            }
        }
    }
    for (label, actual) in table2.labels.iter().zip(&table2.corpus) {
        if let Some(&[u, t]) = targets.table2.corpus.get(label) {
            let want = CountPair { unique: u, total: t };
            if *actual != want {
                out.push(Delta {
                    table: "table2".into(),
                    row: "corpus".into(),
                    column: label.clone(),
                    target: want.to_string(),
                    actual: actual.to_string(),
                    within_tolerance: false,
                });
            }
        }
    }
    for (i, a) in table3.labels.iter().enumerate() {
        for (j, b) in table3.labels.iter().enumerate() {
            let Some(want) = targets.similarity(a, b) else {
                continue;
            };
            let got = table3.values[i][j];
            if format!("{got:.3}") != format!("{want:.3}") {
                out.push(Delta {
                    table: "table3".into(),
                    row: a.clone(),
                    column: b.clone(),
                    target: format!("{want:.3}"),
                    actual: format!("{got:.3}"),
                    within_tolerance: (got - want).abs() <= SIMILARITY_TOLERANCE,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Match,
    Mismatch,
    KnownDeviation,
    Gap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub sentence_id: String,
    pub profile: String,
    pub status: RowStatus,
    pub expected: Option<Vec<String>>,
    pub actual: Vec<String>,
    pub counts: CountPair,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub profile: String,
    pub matched: usize,
    pub mismatched: usize,
    pub known_deviations: usize,
    pub gaps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSource {
    pub label: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub profiles: Vec<String>,
    pub summary: Vec<ProfileSummary>,
    pub per_example: Vec<RowResult>,
    pub columns: Vec<ColumnSource>,
    pub table2: Table2,
    pub table3: SimilarityMatrix,
    pub deltas: Vec<Delta>,
}

impl EvalReport {
    /// True when no compared row mismatches. Gaps and listed deviations do
    /// not count against it.
    pub fn all_match(&self) -> bool {
        self.summary.iter().all(|s| s.mismatched == 0)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs every tokenizer on every sentence and diffs against the fixtures.
///
/// The recomputed tables use the target label order. A label is filled from
/// a tokenizer of that name when one was run, otherwise from its fixture
/// rows; tokenizers without a target column are appended after.
pub fn evaluate(
    corpus: &[Sentence],
    fixtures: &[GoldenFixture],
    tokenizers: &[Tokenizer],
    targets: &Targets,
    known: &[KnownDeviation],
) -> EvalReport {
    let index = fixture_index(fixtures);
    let known: BTreeSet<(&str, &str)> = known
        .iter()
        .map(|k| (k.sentence_id.as_str(), k.profile.as_str()))
        .collect();

    let mut per_example = Vec::new();
    let mut summary = Vec::new();
    let mut runs: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for tok in tokenizers {
        let name = tok.name().to_string();
        let mut s = ProfileSummary {
            profile: name.clone(),
            matched: 0,
            mismatched: 0,
            known_deviations: 0,
            gaps: 0,
        };
        let mut col = Vec::with_capacity(corpus.len());
        for sent in corpus {
            let actual = tok.tokenize(&sent.text).texts();
            let expected = index
                .get(&(sent.id.as_str(), name.as_str()))
                .map(|f| f.expected_tokens.clone());
            let status = match &expected {
                None => RowStatus::Gap,
                Some(e) if *e == actual => RowStatus::Match,
                Some(_) if known.contains(&(sent.id.as_str(), name.as_str())) => RowStatus::KnownDeviation,
                Some(_) => RowStatus::Mismatch,
            };
            match status {
                RowStatus::Match => s.matched += 1,
                RowStatus::Mismatch => s.mismatched += 1,
                RowStatus::KnownDeviation => s.known_deviations += 1,
                RowStatus::Gap => s.gaps += 1,
            }
            per_example.push(RowResult {
                sentence_id: sent.id.clone(),
                profile: name.clone(),
                status,
                counts: token_counts(&actual),
                expected,
                actual: actual.clone(),
            });
            col.push(actual);
        }
        summary.push(s);
        runs.push((name, col));
    }

    let mut labels: Vec<String> = targets.labels.clone();
    for (name, _) in &runs {
        if !labels.contains(name) {
            labels.push(name.clone());
        }
    }
    let from_fixtures = fixture_columns(corpus, fixtures, &labels);
    let mut cols = Columns {
        sentence_ids: corpus.iter().map(|s| s.id.clone()).collect(),
        labels: Vec::new(),
        outputs: Vec::new(),
    };
    let mut sources = Vec::new();
    for label in &labels {
        let (source, col) = if let Some((_, col)) = runs.iter().find(|(n, _)| n == label) {
            ("tokenizer", col.clone())
        } else if let Some(j) = from_fixtures.labels.iter().position(|l| l == label) {
            ("fixtures", from_fixtures.outputs[j].clone())
        } else {
            continue;
        };
        cols.labels.push(label.clone());
        cols.outputs.push(col);
        sources.push(ColumnSource {
            label: label.clone(),
            source: source.to_string(),
        });
    }

    let table2 = cols.table2();
    let table3 = cols.table3();
    let deltas = deltas(&table2, &table3, targets);
    EvalReport {
        profiles: runs.into_iter().map(|(n, _)| n).collect(),
        summary,
        per_example,
        columns: sources,
        table2,
        table3,
        deltas,
    }
}

/// Runs tokenizers side by side without fixtures.
pub fn compare(corpus: &[Sentence], tokenizers: &[Tokenizer]) -> Columns {
    Columns {
        sentence_ids: corpus.iter().map(|s| s.id.clone()).collect(),
        labels: tokenizers.iter().map(|t| t.name().to_string()).collect(),
        outputs: tokenizers
            .iter()
            .map(|t| corpus.iter().map(|s| t.tokenize(&s.text).texts()).collect())
            .collect(),
    }
}

pub fn render_table2_tsv(t: &Table2) -> String {
    let mut out = String::from("sentence\tdistinct_outputs");
    for l in &t.labels {
        write!(out, "\t{l}").unwrap();
    }
    out.push('\n');
    for row in &t.rows {
        write!(out, "{}\t{}", row.sentence_id, row.distinct_outputs).unwrap();
        for c in &row.counts {
            write!(out, "\t{c}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("corpus\t-");
    for c in &t.corpus {
        write!(out, "\t{c}").unwrap();
    }
    out.push('\n');
    out
}

pub fn render_table3_tsv(m: &SimilarityMatrix) -> String {
    let mut out = String::from("profile");
    for l in &m.labels {
        write!(out, "\t{l}").unwrap();
    }
    out.push('\n');
    for (l, row) in m.labels.iter().zip(&m.values) {
        out.push_str(l);
        for v in row {
            write!(out, "\t{v:.3}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Human-readable report. Token lists are printed one token per line so
/// tokens containing unusual characters stay readable.
pub fn render_text(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("== fixture comparison ==\n");
    for s in &report.summary {
        writeln!(
            out,
            "{:<12} matched {:>3}  mismatched {:>3}  known deviations {:>3}  gaps {:>3}",
            s.profile, s.matched, s.mismatched, s.known_deviations, s.gaps
        )
        .unwrap();
    }
    for row in &report.per_example {
        match row.status {
            RowStatus::Match => {}
            RowStatus::Gap => {
                writeln!(out, "\n-- {} / {}: no fixture", row.sentence_id, row.profile).unwrap();
            }
            RowStatus::Mismatch | RowStatus::KnownDeviation => {
                let tag = if row.status == RowStatus::Mismatch {
                    "MISMATCH"
                } else {
                    "known deviation"
                };
                writeln!(out, "\n-- {} / {}: {tag}", row.sentence_id, row.profile).unwrap();
                let expected = row.expected.as_deref().unwrap_or(&[]);
                let n = expected.len().max(row.actual.len());
                for k in 0..n {
                    let e = expected.get(k).map_or("", String::as_str);
                    let a = row.actual.get(k).map_or("", String::as_str);
                    let mark = if e == a { ' ' } else { '!' };
                    writeln!(out, "{mark} {e:?}\t{a:?}").unwrap();
                }
            }
        }
    }
    out.push_str("\n== columns ==\n");
    for c in &report.columns {
        writeln!(out, "{}\t{}", c.label, c.source).unwrap();
    }
    out.push_str("\n== unique/total counts ==\n");
    out.push_str(&render_table2_tsv(&report.table2));
    out.push_str("\n== vocabulary jaccard ==\n");
    out.push_str(&render_table3_tsv(&report.table3));
    out.push_str("\n== deltas against targets ==\n");
    if report.deltas.is_empty() {
        out.push_str("none\n");
    }
    for d in &report.deltas {
        writeln!(
            out,
            "{}\t{}\t{}\ttarget {}\tactual {}{}",
            d.table,
            d.row,
            d.column,
            d.target,
            d.actual,
            if d.within_tolerance { "\t(within tolerance)" } else { "" }
        )
        .unwrap();
    }
    writeln!(
        out,
        "\nresult: {}",
        if report.all_match() { "all fixture rows match" } else { "fixture mismatches present" }
    )
    .unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_names() {
        assert_eq!(resolve_profile("whitespace").unwrap().name(), "whitespace");
        assert_eq!(resolve_profile("ptb").unwrap().name(), "ptb");
        assert!(matches!(resolve_profile("nope"), Err(Error::UnknownProfile { .. })));
    }

    #[test]
    fn resolve_files() {
        let dir = tempfile::tempdir().unwrap();
        let rules_path = dir.path().join("r.json");
        std::fs::write(&rules_path, r#"{"name":"dots","suffixes":["\\."]}"#).unwrap();
        let t = resolve_profile(rules_path.to_str().unwrap()).unwrap();
        assert_eq!(t.name(), "dots");
        assert_eq!(t.tokenize("a.").texts(), ["a", "."]);
    }

    #[test]
    fn gap_rows_are_reported() {
        let corpus = vec![Sentence {
            id: "zz".into(),
            text: "hello world".into(),
        }];
        let report = evaluate(&corpus, &data::fixtures(), &[Tokenizer::Whitespace], &data::targets(), &[]);
        assert_eq!(report.per_example.len(), 1);
        assert_eq!(report.per_example[0].status, RowStatus::Gap);
        assert!(report.all_match());
        assert!(render_text(&report).contains("no fixture"));
    }

    #[test]
    fn compare_handles_empty_sentence() {
        let corpus = vec![Sentence {
            id: "e".into(),
            text: String::new(),
        }];
        let cols = compare(&corpus, &[Tokenizer::Whitespace, Tokenizer::Whitespace]);
        let t2 = cols.table2();
        assert_eq!(t2.rows[0].distinct_outputs, 1);
        assert_eq!(t2.rows[0].counts[0], CountPair::default());
    }
}
