//! Lexicon-and-rules sentiment scoring with the semantics of the VADER
//! analyzer, and per-post aggregation.

mod pystr;
mod ruleset;
mod vader;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use ruleset::{parse_lexicon, SentimentConstants, SentimentRuleset};
pub use vader::{normalize, round_to, score_text};

#[derive(Debug, thiserror::Error)]
pub enum SentimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Lexicon { path: PathBuf, line: usize, message: String },
    #[error("invalid sentiment ruleset: {0}")]
    InvalidRuleset(String),
}

/// `compound` is rounded to four decimals like the reference analyzer; the
/// proportions are kept at full precision so they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentResult {
    pub compound: f64,
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
}

impl SentimentResult {
    pub fn neutral() -> Self {
        Self { compound: 0.0, pos: 0.0, neu: 1.0, neg: 0.0 }
    }

    /// Proportions rounded to three decimals as printed by the reference.
    pub fn rounded(&self) -> Self {
        Self { compound: self.compound, pos: round_to(self.pos, 3), neu: round_to(self.neu, 3), neg: round_to(self.neg, 3) }
    }

    pub fn intensity(&self) -> f64 {
        intensity(self.compound)
    }
}

/// Mean compound score; `None` for a post without comments.
pub fn average_post_sentiment(compounds: &[f64]) -> Option<f64> {
    if compounds.is_empty() {
        return None;
    }
    Some(compounds.iter().sum::<f64>() / compounds.len() as f64)
}

/// Scores each comment and averages the compounds.
pub fn score_post<S: AsRef<str>>(comments: &[S], rules: &SentimentRuleset) -> Option<f64> {
    let compounds: Vec<f64> = comments.iter().map(|c| score_text(c.as_ref(), rules).compound).collect();
    average_post_sentiment(&compounds)
}

pub fn intensity(compound: f64) -> f64 {
    compound.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_examples() {
        let r = SentimentRuleset::default();
        assert_eq!(score_text("", &r), SentimentResult::neutral());
        let t = score_text("the the the", &r);
        assert_eq!((t.compound, t.neu), (0.0, 1.0));
        assert_eq!(average_post_sentiment(&[0.5, -0.5]), Some(0.0));
        assert_eq!(average_post_sentiment(&[0.3]), Some(0.3));
        assert_eq!(average_post_sentiment(&[]), None);
        assert_eq!(intensity(-0.7), 0.7);
        assert_eq!(intensity(0.0), 0.0);
    }

    #[test]
    fn bundled_ruleset_valid() {
        let r = SentimentRuleset::default();
        r.validate().unwrap();
        assert_eq!(r.valence_lexicon.len(), 7506);
    }
}
