//! Post records, collection filters, covariates, outlier handling and the
//! on-disk corpus layout.

mod covariates;
mod outliers;
mod record;
mod store;

use std::path::PathBuf;

use chrono::{DateTime, Utc};

use crate::stats::StatsError;

pub use covariates::{caption_length, derive_covariates, CovariateVector, DayNight};
pub use outliers::{
    iqr_keep_mask, median, median_split, remove_outliers_iqr, EngagementField, MemorabilityGroup, OutlierSplit,
};
pub use record::{
    filter_valid, Attachment, AttachmentKind, CommentRecord, Decision, PostCandidate, PostRecord, RejectReason,
    MAX_TOP_COMMENTS, MIN_COMMENTS, MIN_SCORE,
};
pub use store::{
    dedup_records, inspect_image, load_corpus, save_corpus, sha256_hex, DedupOutcome, ImageStore, StoredImage, IMAGE_DIR,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("post `{post_id}` is invalid: {reason}")]
    Invalid { post_id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("post `{post_id}` created at {created_at} is after the reference time {reference_time}")]
    ReferenceBeforeCreation { post_id: String, created_at: DateTime<Utc>, reference_time: DateTime<Utc> },
    #[error("unknown timezone `{0}`")]
    Timezone(String),
    #[error("need at least {needed} records, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("image could not be decoded: {0}")]
    Image(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.into(), source }
    }
}
