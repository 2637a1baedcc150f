use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::client::{ImageDownload, RedditClient};
use super::{FetchConfig, RedditError};
use crate::corpus::{
    filter_valid, inspect_image, sha256_hex, CorpusError, Decision, ImageStore, PostCandidate, PostRecord,
    RejectReason, StoredImage,
};

/// Per-run accounting. `accepted + Σ rejected_by_reason = examined`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReceipt {
    pub fetched_at: DateTime<Utc>,
    pub collection_run: Option<String>,
    pub examined: u64,
    pub accepted: u64,
    pub rejected_by_reason: BTreeMap<RejectReason, u64>,
    pub http_errors: u64,
    pub accepted_by_subreddit: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl FetchReceipt {
    pub fn rejected(&self) -> u64 {
        self.rejected_by_reason.values().sum()
    }

    pub fn reconciles(&self) -> bool {
        self.accepted + self.rejected() == self.examined
    }

    fn reject(&mut self, reason: RejectReason) {
        *self.rejected_by_reason.entry(reason).or_insert(0) += 1;
    }
}

/// Resume point of a collection: listing cursors, finished listings and
/// the images already downloaded per URL.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollectionState {
    pub cursors: BTreeMap<String, String>,
    pub exhausted: BTreeSet<String>,
    /// Image URL → `image_ref` in the store.
    pub downloaded: BTreeMap<String, String>,
}

impl CollectionState {
    /// Missing file means a fresh state.
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        match fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| CorpusError::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(CorpusError::io(path, e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(self).expect("state serializes");
        fs::write(&tmp, text).map_err(|e| CorpusError::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| CorpusError::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionOutcome {
    /// New records, in acceptance order. Nothing is written to the corpus file.
    pub records: Vec<PostRecord>,
    pub receipt: FetchReceipt,
}

struct Run<'a> {
    config: &'a FetchConfig,
    client: &'a RedditClient,
    store: &'a ImageStore,
    state: &'a mut CollectionState,
    corpus_ids: HashSet<String>,
    corpus_hashes: HashSet<String>,
    seen_ids: HashSet<String>,
    run_hashes: HashSet<String>,
    receipt: FetchReceipt,
    records: Vec<PostRecord>,
}

/// Round-robins over the configured subreddits, one listing page at a
/// time, until `target_count` posts are accepted, every subreddit reaches
/// its quota, or the listings run out. Posts already in `existing` are
/// skipped before any download.
pub fn run_collection(
    config: &FetchConfig,
    client: &RedditClient,
    store: &ImageStore,
    existing: &[PostRecord],
    state: &mut CollectionState,
) -> Result<CollectionOutcome, RedditError> {
    config.validate()?;
    let receipt = FetchReceipt {
        fetched_at: client.clock().utc_now(),
        collection_run: config.collection_run.clone(),
        examined: 0,
        accepted: 0,
        rejected_by_reason: BTreeMap::new(),
        http_errors: 0,
        accepted_by_subreddit: config.subreddits.iter().map(|s| (s.clone(), 0)).collect(),
        warning: None,
    };
    let mut run = Run {
        config,
        client,
        store,
        state,
        corpus_ids: existing.iter().map(|r| r.post_id.clone()).collect(),
        corpus_hashes: existing.iter().filter_map(|r| r.image_hash().map(str::to_string)).collect(),
        seen_ids: HashSet::new(),
        run_hashes: HashSet::new(),
        receipt,
        records: Vec::new(),
    };
    run.collect()?;

    let mut receipt = run.receipt;
    debug_assert!(receipt.reconciles());
    if receipt.accepted == 0 {
        let msg = "no posts accepted".to_string();
        log::warn!("{msg}");
        receipt.warning = Some(msg);
    }
    Ok(CollectionOutcome { records: run.records, receipt })
}

impl Run<'_> {
    fn accepted_in(&self, sub: &str) -> usize {
        self.receipt.accepted_by_subreddit.get(sub).copied().unwrap_or(0) as usize
    }

    fn full(&self) -> bool {
        self.records.len() >= self.config.target_count
    }

    fn collect(&mut self) -> Result<(), RedditError> {
        let mut failed: HashSet<String> = HashSet::new();
        loop {
            let mut progressed = false;
            for sub in &self.config.subreddits {
                if self.full() {
                    return Ok(());
                }
                if failed.contains(sub)
                    || self.state.exhausted.contains(sub)
                    || self.accepted_in(sub) >= self.config.per_subreddit_quota
                {
                    continue;
                }
                let cursor = self.state.cursors.get(sub).cloned();
                let page = match self.client.fetch_listing(sub, self.config.sort_order, cursor.as_deref()) {
                    Ok(p) => p,
                    Err(e) if e.is_fetch_failure() => {
                        log::warn!("listing r/{sub}: {e}; skipping it for this run");
                        self.receipt.http_errors += 1;
                        failed.insert(sub.clone());
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                progressed = true;
                for _ in 0..page.malformed {
                    self.receipt.examined += 1;
                    self.receipt.reject(RejectReason::Malformed);
                }
                let mut finished = true;
                for cand in &page.candidates {
                    if self.full() || self.accepted_in(sub) >= self.config.per_subreddit_quota {
                        finished = false;
                        break;
                    }
                    self.receipt.examined += 1;
                    match self.consider(sub, cand)? {
                        Ok(record) => {
                            self.receipt.accepted += 1;
                            *self.receipt.accepted_by_subreddit.entry(sub.clone()).or_insert(0) += 1;
                            self.records.push(record);
                        }
                        Err(reason) => self.receipt.reject(reason),
                    }
                }
                if finished {
                    match page.after {
                        Some(next) if cursor.as_deref() != Some(next.as_str()) => {
                            self.state.cursors.insert(sub.clone(), next);
                        }
                        _ => {
                            self.state.exhausted.insert(sub.clone());
                        }
                    }
                }
            }
            if !progressed || self.full() {
                return Ok(());
            }
        }
    }

    fn consider(&mut self, sub: &str, cand: &PostCandidate) -> Result<Result<PostRecord, RejectReason>, RedditError> {
        if self.corpus_ids.contains(&cand.post_id) {
            return Ok(Err(RejectReason::AlreadyStored));
        }
        if !self.seen_ids.insert(cand.post_id.clone()) {
            return Ok(Err(RejectReason::Duplicate));
        }
        match filter_valid(cand) {
            Ok(Decision::Accept) => {}
            Ok(Decision::Reject(r)) => return Ok(Err(r)),
            Err(e) => {
                log::warn!("{e}");
                return Ok(Err(RejectReason::Malformed));
            }
        }

        let comments = match self.client.fetch_top_comments(&cand.post_id, self.config.top_comments) {
            Ok(c) => c,
            Err(e) if e.is_fetch_failure() => return Ok(Err(self.fetch_failed(&e))),
            Err(e) => return Err(e),
        };
        let url = &cand.attachments[0].url;
        let image = match self.local_image(url)? {
            Some(img) => img,
            None => match self.client.download_image(url, self.store) {
                Ok(ImageDownload::Stored { image, .. }) => {
                    self.state.downloaded.insert(url.clone(), image.image_ref.clone());
                    image
                }
                Ok(ImageDownload::Rejected(r)) => return Ok(Err(r)),
                Err(e) if e.is_fetch_failure() => return Ok(Err(self.fetch_failed(&e))),
                Err(e) => return Err(e),
            },
        };
        if self.corpus_hashes.contains(&image.hash) {
            return Ok(Err(RejectReason::AlreadyStored));
        }
        if !self.run_hashes.insert(image.hash.clone()) {
            return Ok(Err(RejectReason::Duplicate));
        }

        let record = PostRecord {
            post_id: cand.post_id.clone(),
            subreddit: if cand.subreddit.is_empty() { sub.to_string() } else { cand.subreddit.clone() },
            caption: cand.caption.clone(),
            created_at: cand.created_at,
            fetched_at: self.client.clock().utc_now(),
            score: cand.score,
            num_comments: cand.num_comments as u64,
            image_ref: image.image_ref,
            image_width: image.width,
            image_height: image.height,
            file_size: image.file_size,
            top_comments: comments,
            collection_run: self.config.collection_run.clone(),
        };
        record.validate()?;
        Ok(Ok(record))
    }

    fn fetch_failed(&mut self, e: &RedditError) -> RejectReason {
        log::warn!("{e}");
        self.receipt.http_errors += 1;
        RejectReason::FetchError
    }

    /// An image fetched by an earlier run of this collection, read back from the store.
    fn local_image(&self, url: &str) -> Result<Option<StoredImage>, RedditError> {
        let Some(image_ref) = self.state.downloaded.get(url) else { return Ok(None) };
        let path = self.store.resolve(image_ref);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = self.store.read(image_ref)?;
        let (width, height, _) = inspect_image(&bytes)?;
        Ok(Some(StoredImage {
            hash: sha256_hex(&bytes),
            image_ref: image_ref.clone(),
            width,
            height,
            file_size: bytes.len() as u64,
            newly_written: false,
        }))
    }
}
