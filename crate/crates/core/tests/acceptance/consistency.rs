//! Criterion: consistency scores on the toy table equal hand-computed
//! values; on a real GloVe file (when available) "rock" prefers "stone"
//! over "ground".

use std::path::PathBuf;

use viramem_core::embeddings::{best_match, consistency_score, load_embeddings, LoadOptions};

use crate::common::{fixture_path, load_fixture, Cases};
use crate::Outcome;

/// Path of a 100-d GloVe text file for the real-vector check.
pub const GLOVE_ENV: &str = "VIRAMEM_GLOVE_PATH";
const TOL: f64 = 1e-12;

#[derive(serde::Deserialize)]
struct Case {
    tokens: Vec<String>,
    labels: Vec<String>,
    value: Option<f64>,
}

pub fn run() -> Outcome {
    let table = load_embeddings(&fixture_path("embeddings/toy.100d.txt"), &LoadOptions::default()).expect("toy table");
    let s = |t: &[&str], l: &[&str]| consistency_score(t, l, &table).value;
    // toy vectors: stone (4,1,0,0,0) rock (3,1,1,0,0) ground (1,0,3,1,0)
    // water (0,0,4,0,-1) tower (1,3,0,0,1) money (-1,0,0,3,0) sky (0,2,1,-2,0)
    let hand: Vec<(&str, Option<f64>, Option<f64>)> = vec![
        ("identical word", s(&["stone"], &["stone"]), Some(1.0)),
        ("rock vs stone/ground", s(&["rock"], &["stone", "ground"]), Some(13.0 / (11.0f64 * 17.0).sqrt())),
        ("label order", s(&["rock"], &["ground", "stone"]), Some(13.0 / (11.0f64 * 17.0).sqrt())),
        ("repeated token", s(&["water", "water"], &["water"]), Some(1.0)),
        (
            "two tokens, three labels",
            s(&["money", "sky"], &["water", "tower", "ground"]),
            Some((2.0 / 110.0f64.sqrt() + 2.0 / 11.0f64.sqrt()) / 2.0),
        ),
        ("no vector for token", s(&["unicorn"], &["stone"]), None),
        ("no vector for label", s(&["stone"], &["unicorn"]), None),
    ];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, got, want) in &hand {
        match (got, want) {
            (Some(g), Some(w)) => {
                worst = worst.max((g - w).abs());
                if (g - w).abs() > TOL {
                    failures.push(format!("{name}: {g} != {w}"));
                }
            }
            (g, w) if g == w => {}
            (g, w) => failures.push(format!("{name}: {g:?} != {w:?}")),
        }
    }
    let frozen: Cases<Case> = load_fixture("embeddings/consistency_cases.json");
    for c in &frozen.cases {
        let got = consistency_score(&c.tokens, &c.labels, &table).value;
        let ok = match (got, c.value) {
            (Some(a), Some(b)) => (a - b).abs() <= TOL,
            (a, b) => a == b,
        };
        if !ok {
            failures.push(format!("frozen case {:?}: {got:?} != {:?}", c.tokens, c.value));
        }
    }
    match best_match("rock", &["ground", "stone"], &table) {
        Some((l, _)) if l == "stone" => {}
        other => failures.push(format!("toy rock -> {other:?}")),
    }

    let real = match std::env::var_os(GLOVE_ENV).map(PathBuf::from) {
        Some(path) if path.is_file() => {
            let vocab = ["rock", "stone", "ground"].iter().map(|s| s.to_string()).collect();
            let opts = LoadOptions { vocabulary: Some(&vocab), ..LoadOptions::default() };
            match load_embeddings(&path, &opts) {
                Ok(t) => match best_match("rock", &["ground", "stone"], &t) {
                    Some((l, cos)) if l == "stone" => format!("real vectors: rock -> stone (cos {cos:.3})"),
                    other => {
                        failures.push(format!("real vectors: rock -> {other:?}"));
                        String::new()
                    }
                },
                Err(e) => {
                    failures.push(format!("real vectors: {e}"));
                    String::new()
                }
            }
        }
        _ => format!("real-vector ordering skipped (set {GLOVE_ENV})"),
    };
    Outcome::from_failures(
        format!("{} hand cases max err {worst:.1e}, {} frozen cases; {real}", hand.len(), frozen.cases.len()),
        failures,
    )
}
