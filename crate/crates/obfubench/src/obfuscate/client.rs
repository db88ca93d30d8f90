//! Cached, retrying, rate-limited access to chat endpoints.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use obfubench_core::prompt::Message;
use serde_json::Value;
use thiserror::Error;

use super::cache::{cache_key, canonical_request, ResponseCache};
use super::provider::{auth_headers, build_request, parse_response, ProviderConfig};

/// Waits before the first, second and third retry.
pub const BACKOFF: [Duration; 3] = [Duration::from_secs(1), Duration::from_secs(2), Duration::from_secs(4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Live,
    /// Cache only; the transport is never touched.
    Offline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    /// `Ok` for any HTTP status; `Err` only when no response arrived.
    fn post(&self, url: &str, headers: &[(String, String)], body: &str, timeout: Duration) -> Result<HttpResponse, String>;
}

pub trait Sleeper: Send + Sync {
    fn sleep(&self, d: Duration);
}

pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post(&self, url: &str, headers: &[(String, String)], body: &str, timeout: Duration) -> Result<HttpResponse, String> {
        let mut req = ureq::post(url).timeout(timeout);
        for (k, v) in headers {
            req = req.set(k, v);
        }
        match req.send_string(body) {
            Ok(resp) => {
                let status = resp.status();
                let body = resp.into_string().map_err(|e| e.to_string())?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, resp)) => Ok(HttpResponse {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RequestError {
    #[error("missing or rejected credentials: {0}")]
    Auth(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("rate limited on every attempt")]
    RateLimitExhausted,
    #[error("no cached response for key {0}")]
    CacheMiss(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unexpected response body: {0}")]
    Malformed(String),
    #[error("cache write failed: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub cache_key: String,
    pub text: String,
    pub recorded_at: u64,
}

/// Enforces a minimum spacing between request starts.
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    /// Reserves the next slot and returns how long to wait for it.
    pub fn reserve(&self) -> Duration {
        let now = Instant::now();
        let mut next = self.next.lock().expect("rate limiter lock");
        let slot = next.map_or(now, |n| n.max(now));
        *next = Some(slot + self.interval);
        slot - now
    }
}

pub struct ProviderClient<'a> {
    pub config: ProviderConfig,
    transport: &'a dyn Transport,
    sleeper: &'a dyn Sleeper,
    limiter: RateLimiter,
    api_key: Option<String>,
}

impl<'a> ProviderClient<'a> {
    /// Reads the API key from the provider's environment variable.
    pub fn new(config: ProviderConfig, transport: &'a dyn Transport, sleeper: &'a dyn Sleeper) -> Self {
        let api_key = std::env::var(config.auth_env_var()).ok().filter(|k| !k.is_empty());
        Self::with_key(config, transport, sleeper, api_key)
    }

    pub fn with_key(
        config: ProviderConfig,
        transport: &'a dyn Transport,
        sleeper: &'a dyn Sleeper,
        api_key: Option<String>,
    ) -> Self {
        let limiter = RateLimiter::new(Duration::from_millis(config.min_interval_ms));
        Self {
            config,
            transport,
            sleeper,
            limiter,
            api_key,
        }
    }

    /// Returns the cached answer when present; in live mode fetches and
    /// records it otherwise.
    pub fn request_obfuscation(&self, messages: &[Message], cache: &ResponseCache, mode: Mode) -> Result<Answer, RequestError> {
        let request = canonical_request(&self.config, messages);
        let key = cache_key(&request);
        if let Some(hit) = cache.get(&key) {
            return Ok(Answer {
                cache_key: key,
                text: hit.response,
                recorded_at: hit.timestamp,
            });
        }
        if mode == Mode::Offline {
            return Err(RequestError::CacheMiss(key));
        }
        let text = self.fetch(messages)?;
        let entry = cache.put(&key, request, &text).map_err(|e| RequestError::Cache(e.to_string()))?;
        Ok(Answer {
            cache_key: key,
            text,
            recorded_at: entry.timestamp,
        })
    }

    fn fetch(&self, messages: &[Message]) -> Result<String, RequestError> {
        let key = self
            .api_key
            .as_deref()
            .ok_or_else(|| RequestError::Auth(format!("{} is not set", self.config.auth_env_var())))?;
        let http = build_request(&self.config, messages);
        let mut headers = http.headers.clone();
        headers.extend(auth_headers(self.config.kind, key));
        let body = http.body.to_string();
        let timeout = Duration::from_secs(self.config.timeout_secs);

        let mut last = RequestError::RateLimitExhausted;
        for attempt in 0..=BACKOFF.len() {
            if attempt > 0 {
                self.sleeper.sleep(BACKOFF[attempt - 1]);
            }
            let wait = self.limiter.reserve();
            if !wait.is_zero() {
                self.sleeper.sleep(wait);
            }
            last = match self.transport.post(&http.url, &headers, &body, timeout) {
                Err(e) => RequestError::Transport(e),
                Ok(r) if r.status == 429 => RequestError::RateLimitExhausted,
                Ok(r) if r.status == 401 || r.status == 403 => return Err(RequestError::Auth(format!("HTTP {}", r.status))),
                Ok(r) if r.status >= 500 => RequestError::Http {
                    status: r.status,
                    body: r.body,
                },
                Ok(r) if !(200..300).contains(&r.status) => {
                    return Err(RequestError::Http {
                        status: r.status,
                        body: r.body,
                    })
                }
                Ok(r) => {
                    let value: Value = serde_json::from_str(&r.body).map_err(|e| RequestError::Malformed(e.to_string()))?;
                    return parse_response(self.config.kind, &value)
                        .ok_or_else(|| RequestError::Malformed(truncate(&r.body, 200)));
                }
            };
        }
        Err(last)
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}
