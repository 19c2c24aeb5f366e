//! Sequential rule-based tokenization.
//!
//! Text is first split into whitespace chunks. Each chunk then goes through a
//! fixed pipeline driven by a [`RuleSet`]:
//!
//! 1. an exact special-case match emits its declared pieces;
//! 2. a protected pattern matching the whole chunk emits it unchanged;
//! 3. otherwise one prefix and then one suffix are stripped per round, with
//!    the special-case and protected checks repeated after every strip, until
//!    neither applies;
//! 4. the remainder is split at every infix match, and each match becomes a
//!    token of its own.
//!
//! Within one rule kind the first listed pattern that matches wins. Patterns
//! use the [`fancy_regex`] dialect (Rust `regex` syntax plus look-around and
//! backreferences). Prefix patterns are anchored at the start of the
//! remainder, suffix patterns at its end, and protected patterns at both.
//!
//! Every emitted token is a verbatim substring of the input, so a rule set can
//! change where text is cut but never what it contains.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Token, TokenizedSentence};
use crate::whitespace;

/// Names of the rule sets that ship with the crate.
pub const BUILTIN_PROFILES: &[&str] = &["ptb", "web", "biomed", "r_basic"];

const BUILTIN_SOURCES: &[(&str, &str)] = &[
    ("ptb", include_str!("../data/profiles/ptb.json")),
    ("web", include_str!("../data/profiles/web.json")),
    ("biomed", include_str!("../data/profiles/biomed.json")),
    ("r_basic", include_str!("../data/profiles/r_basic.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Special,
    Protected,
    Prefix,
    Suffix,
    Infix,
}

impl RuleKind {
    fn as_str(self) -> &'static str {
        match self {
            RuleKind::Special => "special",
            RuleKind::Protected => "protected",
            RuleKind::Prefix => "prefix",
            RuleKind::Suffix => "suffix",
            RuleKind::Infix => "infix",
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
struct Rule {
    source: String,
    regex: Regex,
}

impl Rule {
    fn compile(kind: RuleKind, source: &str) -> Result<Self> {
        let anchored = match kind {
            RuleKind::Prefix => format!("^(?:{source})"),
            RuleKind::Suffix => format!("(?:{source})$"),
            RuleKind::Protected => format!("^(?:{source})$"),
            RuleKind::Infix | RuleKind::Special => source.to_string(),
        };
        let regex = Regex::new(&anchored).map_err(|e| Error::Pattern {
            kind: kind.as_str(),
            pattern: source.to_string(),
            message: e.to_string(),
        })?;
        Ok(Rule {
            source: source.to_string(),
            regex,
        })
    }

    /// First non-empty match. Matcher errors (backtracking limits) count as
    /// no match.
    fn find(&self, s: &str) -> Option<(usize, usize)> {
        match self.regex.find(s) {
            Ok(Some(m)) if m.start() < m.end() => Some((m.start(), m.end())),
            _ => None,
        }
    }

    fn is_match(&self, s: &str) -> bool {
        self.regex.is_match(s).unwrap_or(false)
    }
}

/// On-disk form of a rule set.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleSetSpec {
    pub name: String,
    #[serde(default)]
    pub prefixes: Vec<String>,
    #[serde(default)]
    pub suffixes: Vec<String>,
    #[serde(default)]
    pub infixes: Vec<String>,
    #[serde(default)]
    pub special_cases: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub protected: Vec<String>,
}

/// A compiled, immutable rule set.
#[derive(Debug, Clone)]
pub struct RuleSet {
    name: String,
    prefixes: Vec<Rule>,
    suffixes: Vec<Rule>,
    infixes: Vec<Rule>,
    special_cases: BTreeMap<String, Vec<String>>,
    protected: Vec<Rule>,
}

impl RuleSet {
    pub fn from_spec(spec: RuleSetSpec) -> Result<Self> {
        let compile_all = |kind, patterns: &[String]| -> Result<Vec<Rule>> {
            patterns.iter().map(|p| Rule::compile(kind, p)).collect()
        };
        for (key, pieces) in &spec.special_cases {
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!(
                    "special case key {key:?} must be a non-empty chunk without whitespace"
                )));
            }
            if pieces.is_empty() || pieces.iter().any(String::is_empty) {
                return Err(Error::Validation(format!(
                    "special case {key:?} must map to non-empty pieces"
                )));
            }
            if pieces.concat() != *key {
                return Err(Error::Validation(format!(
                    "special case pieces {pieces:?} do not concatenate to {key:?}"
                )));
            }
        }
        Ok(RuleSet {
            prefixes: compile_all(RuleKind::Prefix, &spec.prefixes)?,
            suffixes: compile_all(RuleKind::Suffix, &spec.suffixes)?,
            infixes: compile_all(RuleKind::Infix, &spec.infixes)?,
            protected: compile_all(RuleKind::Protected, &spec.protected)?,
            special_cases: spec.special_cases,
            name: spec.name,
        })
    }

    pub fn to_spec(&self) -> RuleSetSpec {
        let sources = |rules: &[Rule]| rules.iter().map(|r| r.source.clone()).collect();
        RuleSetSpec {
            name: self.name.clone(),
            prefixes: sources(&self.prefixes),
            suffixes: sources(&self.suffixes),
            infixes: sources(&self.infixes),
            special_cases: self.special_cases.clone(),
            protected: sources(&self.protected),
        }
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(raw)?)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_spec()).expect("spec serializes");
        out.push('\n');
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tokenize(&self, text: &str) -> TokenizedSentence {
        tokenize_rules(text, self)
    }

    fn special(&self, s: &str) -> Option<&[String]> {
        self.special_cases.get(s).map(Vec::as_slice)
    }

    fn protected_by(&self, s: &str) -> Option<&Rule> {
        self.protected.iter().find(|r| r.is_match(s))
    }

    fn first_match<'r>(rules: &'r [Rule], s: &str) -> Option<(&'r Rule, usize, usize)> {
        rules
            .iter()
            .find_map(|r| r.find(s).map(|(a, b)| (r, a, b)))
    }

    /// Splits one whitespace-free chunk into byte ranges relative to it,
    /// optionally recording every rule application.
    fn split_chunk(&self, chunk: &str, mut steps: Option<&mut Vec<TraceStep>>) -> Vec<(usize, usize)> {
        let mut record = |kind: RuleKind, pattern: &str, pieces: Vec<String>| {
            if let Some(steps) = steps.as_deref_mut() {
                steps.push(TraceStep {
                    kind,
                    pattern: pattern.to_string(),
                    pieces,
                });
            }
        };

        let mut head: Vec<(usize, usize)> = Vec::new();
        let mut tail: Vec<(usize, usize)> = Vec::new();
        let (mut lo, mut hi) = (0, chunk.len());

        // Returns true when the remainder has been fully resolved into `head`.
        let settle = |lo: &mut usize, hi: usize, head: &mut Vec<(usize, usize)>, record: &mut dyn FnMut(RuleKind, &str, Vec<String>)| -> bool {
            let rem = &chunk[*lo..hi];
            if rem.is_empty() {
                return true;
            }
            if let Some(pieces) = self.special(rem) {
                record(RuleKind::Special, rem, pieces.to_vec());
                let mut at = *lo;
                for piece in pieces {
                    head.push((at, at + piece.len()));
                    at += piece.len();
                }
                *lo = hi;
                return true;
            }
            if let Some(rule) = self.protected_by(rem) {
                record(RuleKind::Protected, &rule.source, vec![rem.to_string()]);
                head.push((*lo, hi));
                *lo = hi;
                return true;
            }
            false
        };

        let resolved = loop {
            if settle(&mut lo, hi, &mut head, &mut record) {
                break true;
            }
            let mut changed = false;
            if let Some((rule, _, end)) = Self::first_match(&self.prefixes, &chunk[lo..hi]) {
                record(RuleKind::Prefix, &rule.source, vec![chunk[lo..lo + end].to_string()]);
                head.push((lo, lo + end));
                lo += end;
                changed = true;
                if settle(&mut lo, hi, &mut head, &mut record) {
                    break true;
                }
            }
            if let Some((rule, start, _)) = Self::first_match(&self.suffixes, &chunk[lo..hi]) {
                record(RuleKind::Suffix, &rule.source, vec![chunk[lo + start..hi].to_string()]);
                tail.push((lo + start, hi));
                hi = lo + start;
                changed = true;
            }
            if !changed {
                break false;
            }
        };

        if !resolved {
            let rem = &chunk[lo..hi];
            let mut cuts: Vec<(usize, usize, &Rule)> = Vec::new();
            for rule in &self.infixes {
                for m in rule.regex.find_iter(rem).flatten() {
                    let (s, e) = (m.start(), m.end());
                    if s == e || cuts.iter().any(|&(a, b, _)| s < b && a < e) {
                        continue;
                    }
                    cuts.push((s, e, rule));
                }
            }
            cuts.sort_by_key(|&(s, _, _)| s);
            let mut at = 0;
            for (s, e, rule) in cuts {
                let mut pieces = Vec::with_capacity(2);
                if s > at {
                    head.push((lo + at, lo + s));
                    pieces.push(rem[at..s].to_string());
                }
                head.push((lo + s, lo + e));
                pieces.push(rem[s..e].to_string());
                record(RuleKind::Infix, &rule.source, pieces);
                at = e;
            }
            if at < rem.len() {
                head.push((lo + at, hi));
            }
        }

        head.extend(tail.into_iter().rev());
        head
    }
}

/// Tokenizes `text` by whitespace pre-splitting followed by the rule pipeline.
pub fn tokenize_rules(text: &str, rules: &RuleSet) -> TokenizedSentence {
    let mut tokens = Vec::new();
    for (cs, ce) in whitespace::chunks(text) {
        for (s, e) in rules.split_chunk(&text[cs..ce], None) {
            tokens.push(Token::from_span(text, cs + s, cs + e));
        }
    }
    TokenizedSentence::new(rules.name.clone(), tokens)
}

/// Returns one of the packaged rule sets.
pub fn builtin_profile(name: &str) -> Result<RuleSet> {
    let (_, raw) = BUILTIN_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownProfile {
            name: name.to_string(),
            valid: BUILTIN_PROFILES.iter().map(|s| s.to_string()).collect(),
        })?;
    RuleSet::from_json(raw)
}

pub fn load_ruleset(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RuleSet::from_json(&raw)
}

pub fn save_ruleset(rules: &RuleSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, rules.to_json()).map_err(|e| Error::io(path, e))
}

/// One rule application. `pieces` are the tokens the step emitted; for an
/// infix step that is the text before the match (when non-empty) and the
/// match itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub kind: RuleKind,
    pub pattern: String,
    pub pieces: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTrace {
    pub chunk: String,
    pub steps: Vec<TraceStep>,
    pub pieces: Vec<String>,
}

impl RuleTrace {
    /// Rebuilds the final pieces from `chunk` and `steps` alone.
    pub fn replay(&self) -> Result<Vec<String>> {
        let bad = |step: &TraceStep, rem: &str| {
            Error::Validation(format!(
                "{} step {:?} does not apply to remainder {rem:?}",
                step.kind, step.pieces
            ))
        };
        let mut rem: &str = &self.chunk;
        let mut head: Vec<String> = Vec::new();
        let mut tail: Vec<String> = Vec::new();
        for step in &self.steps {
            match step.kind {
                RuleKind::Prefix => {
                    let p = step.pieces.first().ok_or_else(|| bad(step, rem))?;
                    rem = rem.strip_prefix(p.as_str()).ok_or_else(|| bad(step, rem))?;
                    head.push(p.clone());
                }
                RuleKind::Suffix => {
                    let p = step.pieces.first().ok_or_else(|| bad(step, rem))?;
                    rem = rem.strip_suffix(p.as_str()).ok_or_else(|| bad(step, rem))?;
                    tail.push(p.clone());
                }
                RuleKind::Infix => {
                    let joined = step.pieces.concat();
                    rem = rem.strip_prefix(joined.as_str()).ok_or_else(|| bad(step, rem))?;
                    head.extend(step.pieces.iter().cloned());
                }
                RuleKind::Special | RuleKind::Protected => {
                    if step.pieces.concat() != rem {
                        return Err(bad(step, rem));
                    }
                    head.extend(step.pieces.iter().cloned());
                    rem = "";
                }
            }
        }
        if !rem.is_empty() {
            head.push(rem.to_string());
        }
        head.extend(tail.into_iter().rev());
        Ok(head)
    }
}

/// Records every rule applied to a single whitespace-free chunk.
pub fn trace(chunk: &str, rules: &RuleSet) -> Result<RuleTrace> {
    if chunk.chars().any(char::is_whitespace) {
        return Err(Error::Validation(format!(
            "trace expects a single chunk without whitespace, got {chunk:?}"
        )));
    }
    let mut steps = Vec::new();
    let spans = rules.split_chunk(chunk, Some(&mut steps));
    Ok(RuleTrace {
        chunk: chunk.to_string(),
        steps,
        pieces: spans.iter().map(|&(s, e)| chunk[s..e].to_string()).collect(),
    })
}
