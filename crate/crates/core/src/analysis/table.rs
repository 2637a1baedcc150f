use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::corpus::{caption_length, derive_covariates, CovariateVector, DayNight, PostRecord};
use crate::embeddings::{consistency_score, EmbeddingTable};
use crate::features::{ImageEntry, Stage};
use crate::sentiment::{intensity, score_post, SentimentRuleset};
use crate::textprep::{extract_nouns_from_comments, unique_labels, LexiconSet, TokenList};

use super::AnalysisError;

/// One analysed post: engagement, comment scores and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct PostRow {
    pub post_id: String,
    pub subreddit: String,
    pub collection_run: Option<String>,
    pub image_hash: String,
    pub memorability: f64,
    pub covariates: CovariateVector,
    /// |avg_sentiment|.
    pub sentiment_intensity: Option<f64>,
    pub consistency: Option<f64>,
    /// Letters across the stored comments.
    pub comment_length: u64,
    pub noun_tokens: usize,
    pub matched_tokens: usize,
    pub residuals: Option<BTreeMap<Stage, f64>>,
    /// Outside the IQR fences of the whole joined set.
    pub outlier: bool,
}

impl PostRow {
    pub fn num_comments(&self) -> f64 {
        self.covariates.num_comments as f64
    }

    pub fn post_score(&self) -> f64 {
        self.covariates.post_score as f64
    }

    pub fn avg_sentiment(&self) -> Option<f64> {
        self.covariates.avg_sentiment
    }

    /// Named numeric variable, `None` when missing for this post.
    pub fn variable(&self, name: &str) -> Option<f64> {
        let c = &self.covariates;
        Some(match name {
            "memorability" => self.memorability,
            "num_comments" => c.num_comments as f64,
            "post_score" => c.post_score as f64,
            "avg_sentiment" => return c.avg_sentiment,
            "sentiment_intensity" => return self.sentiment_intensity,
            "consistency" => return self.consistency,
            "comment_length" => self.comment_length as f64,
            "caption_length" => f64::from(c.caption_length),
            "time_of_day" => f64::from(c.time_of_day),
            "posted_duration" => c.posted_duration,
            "file_size_kb" => c.file_size_kb,
            "resolution" => c.resolution as f64,
            _ => return None,
        })
    }
}

/// Variables accepted by [`PostRow::variable`].
pub const VARIABLES: &[&str] = &[
    "memorability",
    "num_comments",
    "post_score",
    "avg_sentiment",
    "sentiment_intensity",
    "consistency",
    "comment_length",
    "caption_length",
    "time_of_day",
    "posted_duration",
    "file_size_kb",
    "resolution",
];

/// Covariates eligible as partial-correlation controls.
pub const COVARIATES: &[&str] = &["caption_length", "time_of_day", "posted_duration", "file_size_kb", "resolution"];

pub(crate) struct TextInputs<'a> {
    pub lexicons: &'a LexiconSet,
    pub ruleset: &'a SentimentRuleset,
    pub dedupe_tokens: bool,
}

/// Per-post comment nouns and label lemmas, kept to look up embeddings once.
pub(crate) struct PostText {
    pub nouns: TokenList,
    pub labels: Option<Vec<String>>,
    pub avg_sentiment: Option<f64>,
}

pub(crate) fn prepare_text(pairs: &[(&PostRecord, &ImageEntry)], inputs: &TextInputs) -> Vec<PostText> {
    pairs
        .par_iter()
        .map(|(record, entry)| {
            let bodies: Vec<&str> = record.top_comments.iter().map(|c| c.body.as_str()).collect();
            let mut nouns = extract_nouns_from_comments(&bodies, inputs.lexicons);
            if inputs.dedupe_tokens {
                nouns = nouns.deduped();
            }
            let labels = entry.label_strings().map(|l| unique_labels(&l, inputs.lexicons));
            PostText { nouns, labels, avg_sentiment: score_post(&bodies, inputs.ruleset) }
        })
        .collect()
}

/// Tokens whose vectors the consistency score needs.
pub(crate) fn vocabulary(texts: &[PostText]) -> HashSet<String> {
    let mut v = HashSet::new();
    for t in texts {
        v.extend(t.nouns.tokens.iter().cloned());
        v.extend(t.labels.iter().flatten().cloned());
    }
    v
}

pub(crate) fn build_rows(
    pairs: &[(&PostRecord, &ImageEntry)],
    texts: &[PostText],
    embeddings: Option<&EmbeddingTable>,
    day_night: &DayNight,
    reference_time: Option<chrono::DateTime<chrono::Utc>>,
) -> Result<Vec<PostRow>, AnalysisError> {
    pairs
        .iter()
        .zip(texts)
        .map(|((record, entry), text)| {
            let mut covariates = derive_covariates(record, reference_time.unwrap_or(record.fetched_at), day_night)
                .map_err(|e| AnalysisError::stage("covariates", e))?;
            covariates.avg_sentiment = text.avg_sentiment;
            let (consistency, matched) = match (&text.labels, embeddings) {
                (Some(labels), Some(table)) => {
                    let s = consistency_score(&text.nouns.tokens, labels, table);
                    (s.value, s.matched_pairs.len())
                }
                _ => (None, 0),
            };
            Ok(PostRow {
                post_id: record.post_id.clone(),
                subreddit: record.subreddit.clone(),
                collection_run: record.collection_run.clone(),
                image_hash: entry.image_hash.clone(),
                memorability: entry.memorability,
                sentiment_intensity: text.avg_sentiment.map(intensity),
                consistency,
                comment_length: record.top_comments.iter().map(|c| u64::from(caption_length(&c.body))).sum(),
                noun_tokens: text.nouns.len(),
                matched_tokens: matched,
                covariates,
                residuals: None,
                outlier: false,
            })
        })
        .collect()
}
