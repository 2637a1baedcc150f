//! Criterion: compound scores match the reference analyzer's frozen output
//! on 50 comments to 4 decimals; empty and neutral text score exactly 0.

use viramem_core::sentiment::{score_post, score_text, SentimentRuleset};

use crate::common::{load_fixture, Cases};
use crate::Outcome;

#[derive(serde::Deserialize)]
struct Case {
    text: String,
    compound: f64,
}

pub fn run() -> Outcome {
    let rules = SentimentRuleset::default();
    let cases: Cases<Case> = load_fixture("sentiment/reference_scores.json");
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for c in &cases.cases {
        let got = score_text(&c.text, &rules).compound;
        let err = (got - c.compound).abs();
        worst = worst.max(err);
        if err >= 0.5e-4 {
            failures.push(format!("{:?}: {got} vs {}", c.text, c.compound));
        }
    }
    if cases.cases.len() < 50 {
        failures.push(format!("only {} fixture comments", cases.cases.len()));
    }
    let neutral = ["", "   ", "\n\t", "The table is brown.", "a photo of a bridge"];
    for text in neutral {
        let c = score_text(text, &rules).compound;
        if c != 0.0 {
            failures.push(format!("{text:?} scored {c}"));
        }
    }
    if score_post::<&str>(&[], &rules).is_some() {
        failures.push("a post without comments got a sentiment".into());
    }
    Outcome::from_failures(
        format!("{} comments, max |compound err| {worst:.1e}; {} neutral inputs give 0", cases.cases.len(), neutral.len()),
        failures,
    )
}
