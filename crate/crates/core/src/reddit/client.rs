use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::transport::{Clock, HttpResponse, RateLimiter, Transport};
use super::{FetchConfig, RedditError, SortOrder};
use crate::corpus::{Attachment, AttachmentKind, CommentRecord, ImageStore, PostCandidate, RejectReason, StoredImage};

const PAGE_LIMIT: u32 = 100;
const VIDEO_EXTENSIONS: &[&str] = &["mp4", "webm", "mov", "gifv", "gif", "m3u8"];
const IMAGE_EXTENSIONS: &[&str] = &["jpg", "jpeg", "png", "webp", "bmp"];

/// One page of a subreddit listing.
#[derive(Debug, Clone, PartialEq)]
pub struct ListingPage {
    pub candidates: Vec<PostCandidate>,
    /// Entries that could not be turned into candidates.
    pub malformed: usize,
    /// Cursor for the next page; `None` at the end of the listing.
    pub after: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImageDownload {
    Stored { image: StoredImage, content_type: String },
    Rejected(RejectReason),
}

pub struct RedditClient {
    transport: Box<dyn Transport>,
    clock: Arc<dyn Clock>,
    limiter: Mutex<RateLimiter>,
    user_agent: String,
    base_url: String,
    backoff_base: Duration,
    max_retries: u32,
}

impl RedditClient {
    pub fn new(config: &FetchConfig, transport: Box<dyn Transport>, clock: Arc<dyn Clock>) -> Result<Self, RedditError> {
        config.validate()?;
        Ok(Self {
            transport,
            clock,
            limiter: Mutex::new(RateLimiter::new(config.min_request_interval())),
            user_agent: config.user_agent.clone(),
            base_url: config.base_url.trim_end_matches('/').to_string(),
            backoff_base: Duration::from_secs(2),
            max_retries: 5,
        })
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    pub fn listing_url(&self, subreddit: &str, sort: SortOrder, cursor: Option<&str>) -> String {
        let mut url = format!("{}/r/{subreddit}/{}.json?limit={PAGE_LIMIT}", self.base_url, sort.as_str());
        if let Some(c) = cursor {
            url.push_str("&after=");
            url.push_str(c);
        }
        url
    }

    pub fn comments_url(&self, post_id: &str) -> String {
        format!("{}/comments/{post_id}.json?sort=top", self.base_url)
    }

    /// Rate-limited GET. 429 responses are retried after 2 s, 4 s, ... up to
    /// `max_retries` times; any other status is returned as is.
    fn get(&self, url: &str) -> Result<HttpResponse, RedditError> {
        let mut retries = 0;
        loop {
            self.limiter.lock().unwrap_or_else(|e| e.into_inner()).acquire(self.clock.as_ref());
            let resp = self.transport.get(url, &self.user_agent)?;
            if resp.status != 429 {
                return Ok(resp);
            }
            if retries == self.max_retries {
                return Err(RedditError::RateLimited { url: url.to_string(), retries });
            }
            let wait = self.backoff_base * 2u32.pow(retries);
            log::warn!("rate limited on {url}; retrying in {wait:?}");
            self.clock.sleep(wait);
            retries += 1;
        }
    }

    fn get_json(&self, url: &str) -> Result<Value, RedditError> {
        let resp = self.get(url)?;
        if !(200..300).contains(&resp.status) {
            return Err(RedditError::Http { url: url.to_string(), status: resp.status });
        }
        serde_json::from_slice(&resp.body)
            .map_err(|e| RedditError::Protocol { url: url.to_string(), message: format!("body is not JSON: {e}") })
    }

    pub fn fetch_listing(
        &self,
        subreddit: &str,
        sort: SortOrder,
        cursor: Option<&str>,
    ) -> Result<ListingPage, RedditError> {
        let url = self.listing_url(subreddit, sort, cursor);
        let json = self.get_json(&url)?;
        parse_listing(&json).map_err(|message| RedditError::Protocol { url, message })
    }

    /// Top-level comments ranked by score, deleted ones dropped, at most `n`.
    /// A post that no longer exists yields an empty list.
    pub fn fetch_top_comments(&self, post_id: &str, n: usize) -> Result<Vec<CommentRecord>, RedditError> {
        let url = self.comments_url(post_id);
        let json = match self.get_json(&url) {
            Err(RedditError::Http { status: 404, .. }) => {
                log::warn!("post {post_id} is gone; no comments");
                return Ok(Vec::new());
            }
            other => other?,
        };
        let mut comments = parse_comments(&json).map_err(|message| RedditError::Protocol { url, message })?;
        comments.sort_by(|a, b| b.comment_score.cmp(&a.comment_score));
        comments.truncate(n);
        Ok(comments)
    }

    /// Downloads one image into `store`. Non-raster content is rejected
    /// before anything is written; so are bytes that do not decode.
    pub fn download_image(&self, url: &str, store: &ImageStore) -> Result<ImageDownload, RedditError> {
        if classify_url(url) == Some(AttachmentKind::Video) {
            return Ok(ImageDownload::Rejected(RejectReason::MultiOrNonimage));
        }
        let resp = self.get(url)?;
        if !(200..300).contains(&resp.status) {
            return Err(RedditError::Http { url: url.to_string(), status: resp.status });
        }
        let content_type = resp
            .content_type
            .as_deref()
            .and_then(|c| c.split(';').next())
            .map(|c| c.trim().to_ascii_lowercase())
            .unwrap_or_default();
        if !is_raster_content_type(&content_type) {
            return Ok(ImageDownload::Rejected(RejectReason::MultiOrNonimage));
        }
        match store.put(&resp.body) {
            Ok(image) => Ok(ImageDownload::Stored { image, content_type }),
            Err(crate::corpus::CorpusError::Image(msg)) => {
                log::warn!("{url}: {msg}");
                Ok(ImageDownload::Rejected(RejectReason::CorruptImage))
            }
            Err(e) => Err(e.into()),
        }
    }
}

fn is_raster_content_type(ct: &str) -> bool {
    matches!(ct, "image/jpeg" | "image/jpg" | "image/png" | "image/webp" | "image/bmp")
}

fn url_extension(url: &str) -> Option<String> {
    let path = url.split(['?', '#']).next()?;
    let last = path.rsplit('/').next()?;
    let (_, ext) = last.rsplit_once('.')?;
    Some(ext.to_ascii_lowercase())
}

fn classify_url(url: &str) -> Option<AttachmentKind> {
    let ext = url_extension(url)?;
    if VIDEO_EXTENSIONS.contains(&ext.as_str()) {
        Some(AttachmentKind::Video)
    } else if IMAGE_EXTENSIONS.contains(&ext.as_str()) {
        Some(AttachmentKind::Image)
    } else {
        None
    }
}

fn str_field<'a>(d: &'a Value, key: &str) -> Option<&'a str> {
    d.get(key).and_then(Value::as_str)
}

fn attachments(d: &Value) -> Vec<Attachment> {
    if d.get("is_gallery").and_then(Value::as_bool) == Some(true) {
        let items = d.pointer("/gallery_data/items").and_then(Value::as_array).cloned().unwrap_or_default();
        return items
            .iter()
            .filter_map(|it| str_field(it, "media_id"))
            .map(|id| {
                let meta = d.pointer(&format!("/media_metadata/{id}"));
                let kind = match meta.and_then(|m| str_field(m, "e")) {
                    Some("Image") | None => AttachmentKind::Image,
                    Some("AnimatedImage" | "RedditVideo") => AttachmentKind::Video,
                    Some(_) => AttachmentKind::Other,
                };
                let url = meta
                    .and_then(|m| m.pointer("/s/u"))
                    .and_then(Value::as_str)
                    .map(|u| u.replace("&amp;", "&"))
                    .unwrap_or_else(|| format!("https://i.redd.it/{id}"));
                Attachment { url, kind }
            })
            .collect();
    }
    if d.get("is_self").and_then(Value::as_bool) == Some(true) {
        return Vec::new();
    }
    let Some(url) = str_field(d, "url_overridden_by_dest").or_else(|| str_field(d, "url")) else {
        return Vec::new();
    };
    let hint = str_field(d, "post_hint");
    let kind = if d.get("is_video").and_then(Value::as_bool) == Some(true)
        || matches!(hint, Some("hosted:video" | "rich:video"))
        || classify_url(url) == Some(AttachmentKind::Video)
    {
        AttachmentKind::Video
    } else if hint == Some("image") || classify_url(url) == Some(AttachmentKind::Image) {
        AttachmentKind::Image
    } else {
        AttachmentKind::Other
    };
    vec![Attachment { url: url.to_string(), kind }]
}

fn parse_candidate(d: &Value) -> Result<PostCandidate, String> {
    let post_id = str_field(d, "id").filter(|s| !s.is_empty()).ok_or("missing id")?;
    let created = d.get("created_utc").and_then(Value::as_f64).ok_or("missing created_utc")?;
    let created_at = DateTime::<Utc>::from_timestamp_millis((created * 1000.0).round() as i64)
        .ok_or("created_utc out of range")?;
    Ok(PostCandidate {
        post_id: post_id.to_string(),
        subreddit: str_field(d, "subreddit").unwrap_or_default().to_string(),
        caption: str_field(d, "title").unwrap_or_default().to_string(),
        created_at,
        score: d.get("score").and_then(Value::as_i64).ok_or("missing score")?,
        num_comments: d.get("num_comments").and_then(Value::as_i64).ok_or("missing num_comments")?,
        attachments: attachments(d),
        is_crosspost: d.get("crosspost_parent").is_some_and(|v| !v.is_null())
            || d.get("crosspost_parent_list").and_then(Value::as_array).is_some_and(|l| !l.is_empty()),
    })
}

/// Parses a `Listing` of `t3` entries.
pub fn parse_listing(json: &Value) -> Result<ListingPage, String> {
    if str_field(json, "kind") != Some("Listing") {
        return Err("not a listing".into());
    }
    let children = json.pointer("/data/children").and_then(Value::as_array).ok_or("listing has no children")?;
    let mut candidates = Vec::new();
    let mut malformed = 0;
    for child in children {
        if str_field(child, "kind") != Some("t3") {
            continue;
        }
        match child.get("data").ok_or_else(|| "entry without data".to_string()).and_then(parse_candidate) {
            Ok(c) => candidates.push(c),
            Err(e) => {
                log::warn!("skipping listing entry: {e}");
                malformed += 1;
            }
        }
    }
    let after = json.pointer("/data/after").and_then(Value::as_str).filter(|s| !s.is_empty()).map(str::to_string);
    Ok(ListingPage { candidates, malformed, after })
}

/// Top-level comments of a comments response, in response order.
pub fn parse_comments(json: &Value) -> Result<Vec<CommentRecord>, String> {
    let listing = json.as_array().and_then(|a| a.get(1)).ok_or("expected [post, comments]")?;
    let children = listing.pointer("/data/children").and_then(Value::as_array).ok_or("comments have no children")?;
    let mut out = Vec::new();
    for child in children {
        if str_field(child, "kind") != Some("t1") {
            continue;
        }
        let Some(d) = child.get("data") else { continue };
        let body = str_field(d, "body").unwrap_or_default();
        if matches!(body.trim(), "" | "[deleted]" | "[removed]") {
            continue;
        }
        let comment_score = d.get("score").and_then(Value::as_i64).unwrap_or(0);
        out.push(CommentRecord { body: body.to_string(), comment_score });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn classifies_attachments() {
        let img = parse_candidate(&json!({"id": "a", "created_utc": 1.7e9, "score": 9, "num_comments": 9,
            "url": "https://i.redd.it/x.JPG?w=1", "title": "t"}))
        .unwrap();
        assert_eq!(img.attachments[0].kind, AttachmentKind::Image);

        let vid = parse_candidate(&json!({"id": "b", "created_utc": 1.7e9, "score": 9, "num_comments": 9,
            "url": "https://v.redd.it/abc", "is_video": true}))
        .unwrap();
        assert_eq!(vid.attachments[0].kind, AttachmentKind::Video);

        let gallery = parse_candidate(&json!({"id": "c", "created_utc": 1.7e9, "score": 9, "num_comments": 9,
            "is_gallery": true, "gallery_data": {"items": [{"media_id": "m1"}, {"media_id": "m2"}]},
            "media_metadata": {"m1": {"e": "Image", "s": {"u": "https://preview.redd.it/m1.jpg?a=1&amp;b=2"}}}}))
        .unwrap();
        assert_eq!(gallery.attachments.len(), 2);
        assert_eq!(gallery.attachments[0].url, "https://preview.redd.it/m1.jpg?a=1&b=2");

        let xpost = parse_candidate(&json!({"id": "d", "created_utc": 1.7e9, "score": 9, "num_comments": 9,
            "url": "https://i.redd.it/x.png", "crosspost_parent": "t3_zz"}))
        .unwrap();
        assert!(xpost.is_crosspost);

        let selfpost = parse_candidate(&json!({"id": "e", "created_utc": 1.7e9, "score": 9, "num_comments": 9,
            "is_self": true, "url": "https://www.reddit.com/r/pics/comments/e/"}))
        .unwrap();
        assert!(selfpost.attachments.is_empty());
    }

    #[test]
    fn listing_counts_malformed_entries() {
        let page = parse_listing(&json!({"kind": "Listing", "data": {"after": null, "children": [
            {"kind": "t3", "data": {"id": "ok", "created_utc": 1.0, "score": 1, "num_comments": 1}},
            {"kind": "t3", "data": {"created_utc": 1.0}},
            {"kind": "more", "data": {}}
        ]}}))
        .unwrap();
        assert_eq!(page.candidates.len(), 1);
        assert_eq!(page.malformed, 1);
        assert_eq!(page.after, None);
        assert!(parse_listing(&json!({"kind": "t3"})).is_err());
    }
}
