mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use common::load_fixture;
use proptest::prelude::*;
use viramem_core::textprep::{collapse_repeats, extract_nouns, lemmatize, unique_labels, LexiconSet};

fn lex() -> &'static LexiconSet {
    static LEX: OnceLock<LexiconSet> = OnceLock::new();
    LEX.get_or_init(LexiconSet::bundled)
}

#[derive(serde::Deserialize)]
struct Fixture {
    cases: Vec<CommentCase>,
    labels: Vec<LabelCase>,
}

#[derive(serde::Deserialize)]
struct CommentCase {
    text: String,
    tokens: Vec<String>,
}

#[derive(serde::Deserialize)]
struct LabelCase {
    labels: Vec<String>,
    unique: Vec<String>,
}

#[test]
fn matches_reference_pipeline() {
    let f: Fixture = load_fixture("textprep/conformance.json");
    assert!(f.cases.len() >= 50);
    for c in &f.cases {
        assert_eq!(extract_nouns(&c.text, lex()).tokens, c.tokens, "{:?}", c.text);
    }
    for c in &f.labels {
        assert_eq!(unique_labels(&c.labels, lex()), c.unique);
    }
}

fn comment() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "dragon", "Dragons", "pic", "LOL", "the", "stone", "rocks", "money", "glasses", "it's", "well-known",
        "https://a.b/c", "😀", "!!", "café", "children", "wolves", "berries", "a", "talks", "x7", "東京",
    ]);
    prop::collection::vec(prop_oneof![words.prop_map(String::from), "[a-zA-Z'\\-]{1,8}", "\\PC{1,4}"], 0..12)
        .prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn output_is_nouns_minus_stopwords(text in comment()) {
        let l = lex();
        for t in extract_nouns(&text, l).tokens {
            prop_assert!(l.noun_lexicon.contains(&t), "{t}");
            prop_assert!(l.english_wordlist.contains(&t));
            prop_assert!(!l.is_stopword(&t));
            prop_assert!(!t.is_empty() && t.chars().all(char::is_alphabetic));
        }
    }

    #[test]
    fn extraction_is_deterministic(text in comment()) {
        prop_assert_eq!(extract_nouns(&text, lex()), extract_nouns(&text, lex()));
    }

    #[test]
    fn collapse_keeps_distinct_tokens(tokens in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 0..30)) {
        let out = collapse_repeats(&tokens);
        let before: BTreeSet<_> = tokens.iter().collect();
        let after: BTreeSet<_> = out.iter().collect();
        prop_assert_eq!(before, after);
        prop_assert!(out.windows(3).all(|w| !(w[0] == w[1] && w[1] == w[2])));
    }

    #[test]
    fn lemmatize_is_idempotent(token in "[a-z]{1,12}") {
        let once = lemmatize(&token, lex());
        prop_assert_eq!(lemmatize(&once, lex()), once);
    }
}
