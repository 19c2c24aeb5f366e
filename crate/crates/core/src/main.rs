use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use biotok::harness::{self, render_table2_tsv, render_table3_tsv, render_text, Tokenizer};
use biotok::model::{parse_corpus, parse_fixtures, Sentence};
use biotok::tagger::{self, TrainingConfig};
use biotok::vectorize::{build_dtm, build_tcm};
use biotok::{data, Error, Targets};

#[derive(Parser)]
#[command(name = "biotok", version, about = "Tokenize biomedical text and compare tokenizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Lines,
    Json,
    Tsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Dtm,
    Tcm,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a string or each line of a file.
    Tokenize {
        text: Option<String>,
        /// Read sentences from this file (one per line, or corpus JSONL); `-` is stdin.
        #[arg(long, conflicts_with = "text")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "whitespace")]
        profile: String,
        #[arg(long, value_enum, default_value = "lines")]
        format: Format,
    },
    /// Run several profiles side by side over a corpus.
    Compare {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "whitespace,ptb,web,biomed,r_basic,tagger")]
        profiles: Vec<String>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Diff profiles against golden fixtures and recompute the summary tables.
    Evaluate {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "whitespace,ptb,web,biomed,r_basic")]
        profiles: Vec<String>,
        #[arg(long, value_enum, default_value = "lines")]
        format: Format,
        /// Directory for report.json, report.txt, table2.tsv and table3.tsv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the character tagger on silver labels from a profile.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Profile producing the silver tokenization.
        #[arg(long, default_value = "biomed")]
        profile: String,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a document-term or term co-occurrence matrix.
    Vectorize {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "whitespace")]
        profile: String,
        #[arg(long, value_enum, default_value = "dtm")]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Directory for the matrix (`row col count` lines) and `vocab.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Mismatch,
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_path(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e).into())
}

/// Corpus JSONL when the first non-blank line is an object, otherwise one
/// sentence per line.
fn read_sentences(path: Option<&Path>) -> Result<Vec<Sentence>, Failure> {
    let Some(path) = path else {
        return Ok(data::corpus());
    };
    let raw = read_path(path)?;
    let first = raw.lines().find(|l| !l.trim().is_empty());
    if first.is_some_and(|l| l.trim_start().starts_with('{')) {
        return Ok(parse_corpus(&raw)?);
    }
    Ok(raw
        .lines()
        .enumerate()
        .map(|(i, l)| Sentence {
            id: format!("line{}", i + 1),
            text: l.to_string(),
        })
        .collect())
}

fn resolve_all(names: &[String]) -> Result<Vec<Tokenizer>, Failure> {
    names
        .iter()
        .map(|n| harness::resolve_profile(n.trim()).map_err(Failure::from))
        .collect()
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Error::io(path, e).into())
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Tokenize {
            text,
            input,
            profile,
            format,
        } => {
            let tok = harness::resolve_profile(&profile)?;
            let sentences = match (text, input) {
                (Some(t), _) => vec![Sentence {
                    id: "input".into(),
                    text: t,
                }],
                (None, Some(p)) => read_sentences(Some(&p))?,
                (None, None) => return Err(Failure::Usage("give TEXT or --input".into())),
            };
            for s in &sentences {
                let result = tok.tokenize(&s.text).with_id(&s.id);
                match format {
                    Format::Json => writeln!(out, "{}", serde_json::to_string(&result).map_err(Error::from)?)?,
                    Format::Lines | Format::Tsv => {
                        for t in &result.tokens {
                            writeln!(out, "{}", t.text)?;
                        }
                        if sentences.len() > 1 {
                            writeln!(out)?;
                        }
                    }
                }
            }
        }
        Command::Compare {
            corpus,
            profiles,
            format,
        } => {
            if profiles.len() < 2 {
                return Err(Failure::Usage("compare needs at least two profiles".into()));
            }
            let corpus = read_sentences(corpus.as_deref())?;
            let cols = harness::compare(&corpus, &resolve_all(&profiles)?);
            let table2 = cols.table2();
            let table3 = cols.table3();
            match format {
                Format::Json => {
                    let body = serde_json::json!({ "table2": table2, "table3": table3 });
                    writeln!(out, "{}", serde_json::to_string_pretty(&body).map_err(Error::from)?)?;
                }
                Format::Lines | Format::Tsv => {
                    write!(out, "{}\n{}", render_table2_tsv(&table2), render_table3_tsv(&table3))?;
                }
            }
        }
        Command::Evaluate {
            corpus,
            fixtures,
            targets,
            profiles,
            format,
            out: out_dir,
        } => {
            let corpus = read_sentences(corpus.as_deref())?;
            let fixtures = match fixtures {
                Some(p) => parse_fixtures(&read_path(&p)?)?,
                None => data::fixtures(),
            };
            let targets = match targets {
                Some(p) => Targets::from_json(&read_path(&p)?)?,
                None => data::targets(),
            };
            let tokenizers = resolve_all(&profiles)?;
            let report = harness::evaluate(&corpus, &fixtures, &tokenizers, &targets, &data::known_deviations());
            let text = render_text(&report);
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                write_file(&dir.join("report.json"), &report.to_json())?;
                write_file(&dir.join("report.txt"), &text)?;
                write_file(&dir.join("table2.tsv"), &render_table2_tsv(&report.table2))?;
                write_file(&dir.join("table3.tsv"), &render_table3_tsv(&report.table3))?;
            }
            match format {
                Format::Json => write!(out, "{}", report.to_json())?,
                Format::Lines => write!(out, "{text}")?,
                Format::Tsv => write!(
                    out,
                    "{}\n{}",
                    render_table2_tsv(&report.table2),
                    render_table3_tsv(&report.table3)
                )?,
            }
            if !report.all_match() {
                return Err(Failure::Mismatch);
            }
        }
        Command::Train {
            corpus,
            profile,
            epochs,
            window,
            seed,
            out: path,
        } => {
            let corpus = read_sentences(corpus.as_deref())?;
            if corpus.is_empty() {
                return Err(Failure::Usage("training corpus is empty".into()));
            }
            let config = TrainingConfig {
                epochs,
                window,
                seed,
                ..TrainingConfig::default()
            };
            config.validate()?;
            let silver = harness::resolve_profile(&profile)?;
            let pairs = harness::silver_pairs(&corpus, &silver);
            let model = tagger::train(&pairs, &config)?;
            model.save(&path)?;
            let scores = tagger::evaluate_tagger(&model, &pairs)?;
            writeln!(out, "training tag accuracy: {:.4}", scores.tag_accuracy)?;
            writeln!(out, "training token f1: {:.4}", scores.token_f1)?;
        }
        Command::Vectorize {
            corpus,
            profile,
            mode,
            window,
            out: out_dir,
        } => {
            let corpus = read_sentences(corpus.as_deref())?;
            let tok = harness::resolve_profile(&profile)?;
            let docs: Vec<Vec<String>> = corpus.iter().map(|s| tok.tokenize(&s.text).texts()).collect();
            let mut matrix = Vec::new();
            let (vocab, name) = match mode {
                Mode::Dtm => {
                    let m = build_dtm(&docs);
                    m.write_coo(&mut matrix)?;
                    (m.vocab, "dtm.txt")
                }
                Mode::Tcm => {
                    let m = build_tcm(&docs, window)?;
                    m.write_coo(&mut matrix)?;
                    (m.vocab, "tcm.txt")
                }
            };
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let mut terms = Vec::new();
                vocab.write_to(&mut terms)?;
                fs::write(dir.join(name), &matrix).map_err(|e| Error::io(dir.join(name), e))?;
                fs::write(dir.join("vocab.txt"), &terms).map_err(|e| Error::io(dir.join("vocab.txt"), e))?;
            }
            writeln!(out, "vocabulary size: {}", vocab.len())?;
        }
    }
    Ok(())
}
