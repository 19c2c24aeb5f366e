use std::collections::BTreeSet;

use biotok::model::KNOWN_PROFILES;
use biotok::rules::{self, builtin_profile, load_ruleset, save_ruleset, trace};
use biotok::{data, tokenize_whitespace, TokenizedSentence};

fn expected(id: &str, profile: &str) -> Vec<String> {
    data::fixtures()
        .into_iter()
        .find(|f| f.sentence_id == id && f.profile == profile)
        .unwrap_or_else(|| panic!("no fixture for {id}/{profile}"))
        .expected_tokens
}

#[test]
fn shipped_data_shape() {
    let corpus = data::corpus();
    let fixtures = data::fixtures();
    assert_eq!(corpus.len(), 24);
    assert_eq!(fixtures.len(), 24 * 8);
    let profiles: BTreeSet<&str> = fixtures.iter().map(|f| f.profile.as_str()).collect();
    for p in &profiles {
        assert!(KNOWN_PROFILES.contains(p), "{p}");
    }
    assert_eq!(profiles.len(), 8);
    assert!(data::known_deviations().is_empty());
    assert_eq!(data::targets().labels.len(), 8);
}

#[test]
fn fixture_rows_partition_their_sentence() {
    let corpus = data::corpus();
    for f in data::fixtures() {
        let text = &corpus.iter().find(|s| s.id == f.sentence_id).unwrap().text;
        let aligned = TokenizedSentence::align(text, &f.profile, &f.expected_tokens)
            .unwrap_or_else(|e| panic!("{}/{}: {e}", f.sentence_id, f.profile));
        aligned.validate(text).unwrap();
    }
}

#[test]
fn whitespace_rows() {
    for s in data::corpus() {
        assert_eq!(tokenize_whitespace(&s.text).texts(), expected(&s.id, "whitespace"), "{}", s.id);
    }
}

#[test]
fn rule_profile_rows() {
    for name in rules::BUILTIN_PROFILES {
        let rules = builtin_profile(name).unwrap();
        for s in data::corpus() {
            let got = rules::tokenize_rules(&s.text, &rules);
            got.validate(&s.text).unwrap();
            assert_eq!(got.texts(), expected(&s.id, name), "{name} on {}", s.id);
        }
    }
}

#[test]
fn documented_examples() {
    let ptb = builtin_profile("ptb").unwrap();
    let biomed = builtin_profile("biomed").unwrap();
    assert_eq!(
        rules::tokenize_rules("Normal chest x-ray.", &ptb).texts(),
        ["Normal", "chest", "x-ray", "."]
    );
    assert_eq!(
        rules::tokenize_rules("Normal chest x-ray.", &biomed).texts(),
        ["Normal", "chest", "x", "-", "ray", "."]
    );
}

#[test]
fn saved_rulesets_reload_identically() {
    let dir = tempfile::tempdir().unwrap();
    for name in rules::BUILTIN_PROFILES {
        let original = builtin_profile(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        save_ruleset(&original, &path).unwrap();
        let reloaded = load_ruleset(&path).unwrap();
        assert_eq!(reloaded.to_spec(), original.to_spec());
        for s in data::corpus() {
            assert_eq!(
                rules::tokenize_rules(&s.text, &reloaded),
                rules::tokenize_rules(&s.text, &original),
                "{name} on {}",
                s.id
            );
        }
    }
}

#[test]
fn traces_replay_to_the_tokenizer_output() {
    for name in rules::BUILTIN_PROFILES {
        let rules = builtin_profile(name).unwrap();
        for s in data::corpus() {
            for chunk in s.text.split_whitespace() {
                let t = trace(chunk, &rules).unwrap();
                assert_eq!(t.replay().unwrap(), t.pieces, "{name}: {chunk}");
                assert_eq!(t.pieces, rules::tokenize_rules(chunk, &rules).texts(), "{name}: {chunk}");
            }
        }
    }
}
