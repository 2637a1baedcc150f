//! Listing ingestion: rate-limited HTTP, candidate filtering, top comments,
//! image download and collection runs. All traffic goes through a
//! [`Transport`], so runs can be recorded and replayed offline.

mod client;
mod collect;
mod transport;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use client::{parse_comments, parse_listing, ImageDownload, ListingPage, RedditClient};
pub use collect::{run_collection, CollectionOutcome, CollectionState, FetchReceipt};
pub use transport::{
    transcript_name, Clock, HttpResponse, LiveTransport, ManualClock, RateLimiter, RecordedResponse,
    RecordingTransport, ReplayTransport, SystemClock, Transcript, Transport, TransportError,
};

use crate::corpus::CorpusError;

pub const MIN_REQUEST_INTERVAL_MS: u64 = 500;
pub const DEFAULT_BASE_URL: &str = "https://www.reddit.com";

#[derive(Debug, thiserror::Error)]
pub enum RedditError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("GET {url} returned HTTP {status}")]
    Http { url: String, status: u16 },
    #[error("GET {url} still rate limited after {retries} retries")]
    RateLimited { url: String, retries: u32 },
    #[error("GET {url}: {message}")]
    Protocol { url: String, message: String },
    #[error("invalid fetch config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl RedditError {
    /// True for failures of a single request (as opposed to local I/O or config).
    pub fn is_fetch_failure(&self) -> bool {
        matches!(
            self,
            RedditError::Transport(_)
                | RedditError::Http { .. }
                | RedditError::RateLimited { .. }
                | RedditError::Protocol { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    #[default]
    Hot,
    New,
    Top,
    Rising,
}

impl SortOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            SortOrder::Hot => "hot",
            SortOrder::New => "new",
            SortOrder::Top => "top",
            SortOrder::Rising => "rising",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FetchConfig {
    pub subreddits: Vec<String>,
    pub target_count: usize,
    pub per_subreddit_quota: usize,
    pub user_agent: String,
    pub min_request_interval_ms: u64,
    pub sort_order: SortOrder,
    pub base_url: String,
    pub top_comments: usize,
    pub timeout_secs: u64,
    /// Tag written into every record of this run.
    pub collection_run: Option<String>,
    /// Where to record HTTP transcripts, if anywhere.
    pub record_dir: Option<PathBuf>,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            subreddits: vec!["pics".into(), "pic".into(), "images".into()],
            target_count: 600,
            per_subreddit_quota: 200,
            user_agent: format!("viramem/{} (research data collection)", env!("CARGO_PKG_VERSION")),
            min_request_interval_ms: 1000,
            sort_order: SortOrder::Hot,
            base_url: DEFAULT_BASE_URL.into(),
            top_comments: crate::corpus::MAX_TOP_COMMENTS,
            timeout_secs: 30,
            collection_run: None,
            record_dir: None,
        }
    }
}

impl FetchConfig {
    pub fn validate(&self) -> Result<(), RedditError> {
        let bad = |m: String| Err(RedditError::Config(m));
        if self.subreddits.is_empty() {
            return bad("no subreddits".into());
        }
        if let Some(s) = self.subreddits.iter().find(|s| s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
            return bad(format!("bad subreddit name `{s}`"));
        }
        if self.target_count < 1 {
            return bad("target_count must be at least 1".into());
        }
        if self.per_subreddit_quota < 1 {
            return bad("per_subreddit_quota must be at least 1".into());
        }
        if self.min_request_interval_ms < MIN_REQUEST_INTERVAL_MS {
            return bad(format!(
                "min_request_interval_ms is {}, must be at least {MIN_REQUEST_INTERVAL_MS}",
                self.min_request_interval_ms
            ));
        }
        if self.user_agent.trim().is_empty() {
            return bad("empty user_agent".into());
        }
        if !(1..=crate::corpus::MAX_TOP_COMMENTS).contains(&self.top_comments) {
            return bad(format!("top_comments must be in 1..={}", crate::corpus::MAX_TOP_COMMENTS));
        }
        Ok(())
    }

    pub fn min_request_interval(&self) -> Duration {
        Duration::from_millis(self.min_request_interval_ms)
    }
}
