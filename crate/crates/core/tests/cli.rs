use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn biotok(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biotok")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn tokenize_text() {
    let out = biotok(&["tokenize", "Normal chest x-ray.", "--profile", "whitespace"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "Normal\nchest\nx-ray.\n");

    let out = biotok(&["tokenize", "", "--profile", "ptb"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "");

    let out = biotok(&["tokenize", "x", "--profile", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn tokenize_json_and_files() {
    let out = biotok(&["tokenize", "chest x-ray", "--profile", "biomed", "--format", "json"]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["tokens"][2]["text"], "-");
    assert_eq!(record["tokens"][2]["start"], 7);

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    fs::write(&input, "a b\nc\n").unwrap();
    let out = biotok(&["tokenize", "--input", p(&input)]);
    assert_eq!(stdout(&out), "a\nb\n\nc\n\n");

    let out = biotok(&["tokenize", "--input", p(&dir.path().join("missing.txt"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tokenize_with_saved_ruleset() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    fs::write(&rules, r#"{"name":"mine","infixes":["-"]}"#).unwrap();
    let out = biotok(&["tokenize", "x-ray", "--profile", p(&rules)]);
    assert_eq!(stdout(&out), "x\n-\nray\n");
}

#[test]
fn compare_profiles() {
    let out = biotok(&["compare", "--profiles", "whitespace"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    fs::write(&corpus, "Normal chest x-ray.\n").unwrap();
    let out = biotok(&["compare", "--corpus", p(&corpus), "--profiles", "whitespace,whitespace"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("line1\t1\t3/3\t3/3"), "{text}");

    fs::write(&corpus, "\n").unwrap();
    let out = biotok(&["compare", "--corpus", p(&corpus), "--profiles", "whitespace,ptb"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("line1\t1\t0/0\t0/0"));
}

#[test]
fn compare_shipped_corpus() {
    let out = biotok(&["compare"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("sentence\tdistinct_outputs\twhitespace\tptb\tweb\tbiomed\tr_basic\ttagger\n"));
    assert!(text.contains("corpus\t-\t289/429\t294/499\t294/499\t303/526\t294/501\t"));
}

#[test]
fn evaluate_shipped() {
    let out = biotok(&["evaluate", "--profiles", "whitespace"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("whitespace   matched  24  mismatched   0"));

    let out = biotok(&["evaluate"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn evaluate_gaps_and_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    fs::write(&corpus, "{\"id\":\"new\",\"text\":\"a b\"}\n").unwrap();
    let out = biotok(&["evaluate", "--corpus", p(&corpus), "--profiles", "whitespace", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["per_example"][0]["status"], "gap");

    let fixtures = dir.path().join("f.jsonl");
    fs::write(&fixtures, "{\"sentence_id\":\"new\",\"profile\":\"whitespace\",\"tokens\":[\"a\"]}\n").unwrap();
    let out = biotok(&[
        "evaluate",
        "--corpus",
        p(&corpus),
        "--fixtures",
        p(&fixtures),
        "--profiles",
        "whitespace",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("new / whitespace: MISMATCH"));
}

#[test]
fn evaluate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = biotok(&["evaluate", "--format", "tsv", "--out", p(dir.path())]);
    assert!(out.status.success());
    for name in ["report.json", "report.txt", "table2.tsv", "table3.tsv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let table3 = fs::read_to_string(dir.path().join("table3.tsv")).unwrap();
    assert!(table3.lines().any(|l| l.starts_with("ptb\t") && l.contains("\t0.993\t")));
}

#[test]
fn train_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let out = biotok(&["train", "--profile", "biomed", "--epochs", "10", "--seed", "7", "--out", p(&model)]);
    assert!(out.status.success());
    let line = stdout(&out);
    let acc: f64 = line.lines().next().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(acc >= 0.99, "{line}");

    let out = biotok(&["tokenize", "Normal chest x-ray.", "--profile", p(&model)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "Normal\nchest\nx\n-\nray\n.\n");

    let out = biotok(&["train", "--epochs", "0", "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(2));

    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out = biotok(&["train", "--corpus", p(&empty), "--out", p(&model)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vectorize() {
    let out = biotok(&["vectorize", "--profile", "whitespace", "--mode", "dtm"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "vocabulary size: 289\n");

    let out = biotok(&["vectorize", "--mode", "tcm", "--window", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "").unwrap();
    let out_dir = dir.path().join("empty_out");
    let out = biotok(&["vectorize", "--corpus", p(&empty), "--out", p(&out_dir)]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(out_dir.join("dtm.txt")).unwrap(), "");
    assert_eq!(fs::read_to_string(out_dir.join("vocab.txt")).unwrap(), "");

    let tiny = dir.path().join("tiny.txt");
    fs::write(&tiny, "a b c\nb a\n").unwrap();
    let out_dir = dir.path().join("tiny_out");
    let out = biotok(&["vectorize", "--corpus", p(&tiny), "--mode", "tcm", "--window", "1", "--out", p(&out_dir)]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(out_dir.join("vocab.txt")).unwrap(), "a\nb\nc\n");
    // a-b twice (once per document), b-c once
    assert_eq!(
        fs::read_to_string(out_dir.join("tcm.txt")).unwrap(),
        "0 1 2\n1 0 2\n1 2 1\n2 1 1\n"
    );
}
