//! Record/replay store of provider responses, one JSON file per request.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use obfubench_core::prompt::Message;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::provider::ProviderConfig;

/// The request fields that identify a response.
pub fn canonical_request(p: &ProviderConfig, messages: &[Message]) -> Value {
    json!({
        "provider": p.kind,
        "model": p.model,
        "messages": messages,
        "temperature": p.temperature,
        "seed": p.effective_seed(),
    })
}

/// SHA-256 of the compact JSON encoding with sorted keys.
pub fn cache_key(request: &Value) -> String {
    let encoded = serde_json::to_string(request).expect("values always serialize");
    hex::encode(Sha256::digest(encoded.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request: Value,
    pub response: String,
    /// Seconds since the Unix epoch when the response was recorded.
    pub timestamp: u64,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Writes through a temporary file and a rename so readers never see a
    /// partial entry.
    pub fn put(&self, key: &str, request: Value, response: &str) -> io::Result<CacheEntry> {
        fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry {
            request,
            response: response.into(),
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        };
        let n = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = self.dir.join(format!(".{key}.{}.{n}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string_pretty(&entry)?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path_for(key))?;
        Ok(entry)
    }
}
