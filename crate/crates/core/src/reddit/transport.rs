use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use base64::Engine;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::sha256_hex;

const MAX_BODY_BYTES: u64 = 64 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("request to {url} failed: {message}")]
    Network { url: String, message: String },
    #[error("no recorded response for GET {url}")]
    NotRecorded { url: String },
    #[error("transcript {path}: {message}")]
    Transcript { path: PathBuf, message: String },
}

/// A blocking HTTP GET. Non-2xx statuses are responses, not errors.
pub trait Transport: Send + Sync {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError>;
}

pub struct LiveTransport {
    agent: ureq::Agent,
    bearer: Option<String>,
}

impl LiveTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent, bearer: None }
    }

    /// Sends `Authorization: bearer <token>` with every request.
    pub fn with_bearer(mut self, token: impl Into<String>) -> Self {
        self.bearer = Some(token.into());
        self
    }
}

impl Transport for LiveTransport {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError> {
        let net = |e: ureq::Error| TransportError::Network { url: url.to_string(), message: e.to_string() };
        let mut req = self.agent.get(url).header("User-Agent", user_agent);
        if let Some(token) = &self.bearer {
            req = req.header("Authorization", format!("bearer {token}"));
        }
        let mut resp = req.call().map_err(net)?;
        let status = resp.status().as_u16();
        let content_type = resp.headers().get("content-type").and_then(|v| v.to_str().ok()).map(str::to_string);
        let body = resp.body_mut().with_config().limit(MAX_BODY_BYTES).read_to_vec().map_err(net)?;
        Ok(HttpResponse { status, content_type, body })
    }
}

/// One recorded exchange file: all responses seen for one URL, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub method: String,
    pub url: String,
    pub responses: Vec<RecordedResponse>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordedResponse {
    pub status: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_type: Option<String>,
    /// Base64 of the raw body.
    pub body: String,
}

impl RecordedResponse {
    pub fn from_response(r: &HttpResponse) -> Self {
        Self {
            status: r.status,
            content_type: r.content_type.clone(),
            body: base64::engine::general_purpose::STANDARD.encode(&r.body),
        }
    }

    fn decode(&self, path: &Path) -> Result<HttpResponse, TransportError> {
        let body = base64::engine::general_purpose::STANDARD
            .decode(&self.body)
            .map_err(|e| TransportError::Transcript { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(HttpResponse { status: self.status, content_type: self.content_type.clone(), body })
    }
}

/// File name of the transcript for a GET of `url`.
pub fn transcript_name(url: &str) -> String {
    format!("{}.json", sha256_hex(format!("GET {url}").as_bytes()))
}

/// Serves responses from a transcript directory. Repeated requests for one
/// URL step through its recorded responses; the last one then repeats.
pub struct ReplayTransport {
    dir: PathBuf,
    served: Mutex<HashMap<String, usize>>,
}

impl ReplayTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), served: Mutex::new(HashMap::new()) }
    }
}

impl Transport for ReplayTransport {
    fn get(&self, url: &str, _user_agent: &str) -> Result<HttpResponse, TransportError> {
        let path = self.dir.join(transcript_name(url));
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(TransportError::NotRecorded { url: url.to_string() })
            }
            Err(e) => return Err(TransportError::Transcript { path, message: e.to_string() }),
        };
        let t: Transcript = serde_json::from_str(&text)
            .map_err(|e| TransportError::Transcript { path: path.clone(), message: e.to_string() })?;
        if t.url != url || t.responses.is_empty() {
            return Err(TransportError::Transcript { path, message: format!("does not hold a response for {url}") });
        }
        let mut served = self.served.lock().unwrap_or_else(|e| e.into_inner());
        let k = served.entry(url.to_string()).or_insert(0);
        let r = &t.responses[(*k).min(t.responses.len() - 1)];
        *k += 1;
        r.decode(&path)
    }
}

/// Passes requests through and appends every response to the transcript directory.
pub struct RecordingTransport<T: Transport> {
    inner: T,
    dir: PathBuf,
    lock: Mutex<()>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Result<Self, TransportError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| TransportError::Transcript { path: dir.clone(), message: e.to_string() })?;
        Ok(Self { inner, dir, lock: Mutex::new(()) })
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn get(&self, url: &str, user_agent: &str) -> Result<HttpResponse, TransportError> {
        let resp = self.inner.get(url, user_agent)?;
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let path = self.dir.join(transcript_name(url));
        let err = |e: String| TransportError::Transcript { path: path.clone(), message: e };
        let mut t = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| err(e.to_string()))?,
            Err(_) => Transcript { method: "GET".into(), url: url.to_string(), responses: Vec::new() },
        };
        t.responses.push(RecordedResponse::from_response(&resp));
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&t).expect("transcript serializes")).map_err(|e| err(e.to_string()))?;
        fs::rename(&tmp, &path).map_err(|e| err(e.to_string()))?;
        Ok(resp)
    }
}

/// Time source, replaceable in tests.
pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn elapsed(&self) -> Duration;
    fn sleep(&self, d: Duration);
    fn utc_now(&self) -> DateTime<Utc>;
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn elapsed(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }

    fn utc_now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Clock that only moves when slept on.
pub struct ManualClock {
    start: DateTime<Utc>,
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self { start, now: Mutex::new(Duration::ZERO) }
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap_or_else(|e| e.into_inner()) += d;
    }
}

impl Clock for ManualClock {
    fn elapsed(&self) -> Duration {
        *self.now.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }

    fn utc_now(&self) -> DateTime<Utc> {
        self.start + chrono::Duration::from_std(self.elapsed()).expect("duration in range")
    }
}

/// Spaces request starts at least `interval` apart.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    last: Option<Duration>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        Self { interval, last: None }
    }

    /// Blocks until the next request may start and returns its start time.
    pub fn acquire(&mut self, clock: &dyn Clock) -> Duration {
        if let Some(last) = self.last {
            let ready = last + self.interval;
            let now = clock.elapsed();
            if now < ready {
                clock.sleep(ready - now);
            }
        }
        let start = clock.elapsed();
        self.last = Some(start);
        start
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn limiter_spaces_requests() {
        let clock = ManualClock::new(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap());
        let mut rl = RateLimiter::new(Duration::from_millis(700));
        let a = rl.acquire(&clock);
        clock.advance(Duration::from_millis(100));
        let b = rl.acquire(&clock);
        clock.advance(Duration::from_secs(5));
        let c = rl.acquire(&clock);
        assert_eq!(b - a, Duration::from_millis(700));
        assert_eq!(c - b, Duration::from_secs(5));
    }

    #[test]
    fn record_then_replay() {
        struct Fixed;
        impl Transport for Fixed {
            fn get(&self, url: &str, _: &str) -> Result<HttpResponse, TransportError> {
                Ok(HttpResponse { status: 200, content_type: Some("text/plain".into()), body: url.as_bytes().to_vec() })
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let rec = RecordingTransport::new(Fixed, dir.path()).unwrap();
        let live = rec.get("https://x.test/a?b=1", "ua").unwrap();
        let replay = ReplayTransport::new(dir.path());
        assert_eq!(replay.get("https://x.test/a?b=1", "ua").unwrap(), live);
        assert!(matches!(replay.get("https://x.test/other", "ua"), Err(TransportError::NotRecorded { .. })));
    }
}
