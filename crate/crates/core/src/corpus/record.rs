use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Maximum number of stored comments per post.
pub const MAX_TOP_COMMENTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub body: String,
    pub comment_score: i64,
}

/// One image post as stored in the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub subreddit: String,
    pub caption: String,
    pub created_at: DateTime<Utc>,
    pub fetched_at: DateTime<Utc>,
    /// Platform post score, used as the upvote proxy.
    pub score: i64,
    pub num_comments: u64,
    /// Path of the stored image relative to the corpus file: `images/<sha256>.<ext>`.
    pub image_ref: String,
    pub image_width: u32,
    pub image_height: u32,
    pub file_size: u64,
    pub top_comments: Vec<CommentRecord>,
    /// Collection tag (one per fetch run); timepoint analyses group on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection_run: Option<String>,
}

impl PostRecord {
    /// Content hash of the image, taken from the `image_ref` file stem.
    pub fn image_hash(&self) -> Option<&str> {
        let stem = Path::new(&self.image_ref).file_stem()?.to_str()?;
        (!stem.is_empty()).then_some(stem)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |reason: String| Err(CorpusError::Invalid { post_id: self.post_id.clone(), reason });
        if self.post_id.trim().is_empty() {
            return fail("empty post_id".into());
        }
        if self.image_width == 0 || self.image_height == 0 {
            return fail(format!("image dimensions {}x{}", self.image_width, self.image_height));
        }
        if self.file_size == 0 {
            return fail("file_size is zero".into());
        }
        if self.image_hash().is_none() {
            return fail(format!("image_ref `{}` has no file name", self.image_ref));
        }
        if self.top_comments.len() > MAX_TOP_COMMENTS {
            return fail(format!("{} top comments (max {MAX_TOP_COMMENTS})", self.top_comments.len()));
        }
        if self.top_comments.windows(2).any(|w| w[0].comment_score < w[1].comment_score) {
            return fail("top_comments not sorted by score".into());
        }
        if self.top_comments.iter().any(|c| c.body.trim().is_empty()) {
            return fail("empty comment body".into());
        }
        Ok(())
    }
}

/// A post seen in a listing, before download and filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct PostCandidate {
    pub post_id: String,
    pub subreddit: String,
    pub caption: String,
    pub created_at: DateTime<Utc>,
    pub score: i64,
    pub num_comments: i64,
    pub attachments: Vec<Attachment>,
    pub is_crosspost: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttachmentKind {
    Image,
    Video,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub url: String,
    pub kind: AttachmentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooFewUpvotes,
    TooFewComments,
    NoImage,
    MultiImage,
    MultiOrNonimage,
    CrossPost,
    CorruptImage,
    Duplicate,
    AlreadyStored,
    /// Listing entry missing required fields.
    Malformed,
    /// Comments or image could not be fetched.
    FetchError,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::TooFewUpvotes => "too_few_upvotes",
            RejectReason::TooFewComments => "too_few_comments",
            RejectReason::NoImage => "no_image",
            RejectReason::MultiImage => "multi_image",
            RejectReason::MultiOrNonimage => "multi_or_nonimage",
            RejectReason::CrossPost => "cross_post",
            RejectReason::CorruptImage => "corrupt_image",
            RejectReason::Duplicate => "duplicate",
            RejectReason::AlreadyStored => "already_stored",
            RejectReason::Malformed => "malformed",
            RejectReason::FetchError => "fetch_error",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject(RejectReason),
}

pub const MIN_SCORE: i64 = 5;
pub const MIN_COMMENTS: i64 = 5;

/// Collection criteria: score ≥ 5, ≥ 5 comments and exactly one image.
pub fn filter_valid(candidate: &PostCandidate) -> Result<Decision, CorpusError> {
    let invalid = |reason: &str| {
        Err(CorpusError::Invalid { post_id: candidate.post_id.clone(), reason: reason.to_string() })
    };
    if candidate.post_id.trim().is_empty() {
        return invalid("empty post_id");
    }
    if candidate.num_comments < 0 {
        return invalid("negative comment count");
    }
    if candidate.attachments.iter().any(|a| a.url.trim().is_empty()) {
        return invalid("attachment without url");
    }

    if candidate.is_crosspost {
        return Ok(Decision::Reject(RejectReason::CrossPost));
    }
    let images = candidate.attachments.iter().filter(|a| a.kind == AttachmentKind::Image).count();
    let others = candidate.attachments.len() - images;
    if others > 0 {
        return Ok(Decision::Reject(RejectReason::MultiOrNonimage));
    }
    match images {
        0 => return Ok(Decision::Reject(RejectReason::NoImage)),
        1 => {}
        _ => return Ok(Decision::Reject(RejectReason::MultiImage)),
    }
    if candidate.score < MIN_SCORE {
        return Ok(Decision::Reject(RejectReason::TooFewUpvotes));
    }
    if candidate.num_comments < MIN_COMMENTS {
        return Ok(Decision::Reject(RejectReason::TooFewComments));
    }
    Ok(Decision::Accept)
}
