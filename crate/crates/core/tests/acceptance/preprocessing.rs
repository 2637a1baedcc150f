//! Criterion: repeat collapsing, custom stopwords, the frozen noun
//! extraction cases, and the collection filter boundaries.

use chrono::{TimeZone, Utc};
use viramem_core::corpus::{filter_valid, Attachment, AttachmentKind, Decision, PostCandidate, RejectReason};
use viramem_core::textprep::{collapse_repeats, extract_nouns, LexiconSet};

use crate::common::load_fixture;
use crate::Outcome;

#[derive(serde::Deserialize)]
struct Fixture {
    cases: Vec<CommentCase>,
}

#[derive(serde::Deserialize)]
struct CommentCase {
    text: String,
    tokens: Vec<String>,
}

fn candidate(score: i64, comments: i64, images: usize) -> PostCandidate {
    PostCandidate {
        post_id: "p".into(),
        subreddit: "pics".into(),
        caption: String::new(),
        created_at: Utc.timestamp_opt(1_700_000_000, 0).unwrap(),
        score,
        num_comments: comments,
        attachments: (0..images)
            .map(|i| Attachment { url: format!("https://i.test/{i}.jpg"), kind: AttachmentKind::Image })
            .collect(),
        is_crosspost: false,
    }
}

pub fn run() -> Outcome {
    let lex = LexiconSet::bundled();
    let mut failures = Vec::new();

    if collapse_repeats(&["Money", "Money", "Money"]) != ["Money"] {
        failures.push("Money Money Money did not collapse".into());
    }
    if extract_nouns("Money Money Money", &lex).tokens != ["money"] {
        failures.push("extract_nouns(Money Money Money) != [money]".into());
    }
    for w in ["pic", "picture", "post", "lol"] {
        for text in [w.to_string(), w.to_uppercase(), format!("nice {w} of a dragon")] {
            if extract_nouns(&text, &lex).tokens.iter().any(|t| t == w) {
                failures.push(format!("stopword `{w}` kept in {text:?}"));
            }
        }
    }

    let f: Fixture = load_fixture("textprep/conformance.json");
    let mismatched = f.cases.iter().filter(|c| extract_nouns(&c.text, &lex).tokens != c.tokens).count();
    if mismatched > 0 {
        failures.push(format!("{mismatched}/{} frozen cases differ", f.cases.len()));
    }

    let boundaries = [
        ((5, 5, 1), Decision::Accept),
        ((5, 4, 1), Decision::Reject(RejectReason::TooFewComments)),
        ((4, 5, 1), Decision::Reject(RejectReason::TooFewUpvotes)),
        ((5, 5, 2), Decision::Reject(RejectReason::MultiImage)),
    ];
    for ((score, comments, images), want) in boundaries {
        let got = filter_valid(&candidate(score, comments, images)).expect("well-formed candidate");
        if got != want {
            failures.push(format!("score {score}, {comments} comments, {images} images: {got:?} != {want:?}"));
        }
    }
    Outcome::from_failures(
        format!("collapse, 4 custom stopwords, {} frozen cases, {} filter boundaries", f.cases.len(), boundaries.len()),
        failures,
    )
}
