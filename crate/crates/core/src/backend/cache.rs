use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, CompletionRequest, CompletionResponse, TokenUsage};

#[derive(Serialize)]
struct KeyFields<'a> {
    model: &'a str,
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
    stop: &'a Option<Vec<String>>,
    prompt: &'a str,
}

/// SHA-256 over every request field, hex encoded.
pub fn cache_key(request: &CompletionRequest) -> String {
    let fields = KeyFields {
        model: &request.model,
        temperature: request.temperature,
        top_p: request.top_p,
        max_tokens: request.max_tokens,
        stop: &request.stop,
        prompt: &request.prompt,
    };
    let bytes = serde_json::to_vec(&fields).expect("key fields serialize");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    key: String,
    request: CompletionRequest,
    text: String,
    usage: TokenUsage,
    backend_id: String,
    stored_at_ms: u128,
}

/// Content-addressed response store: one JSON file per request under
/// `<dir>/<first two key chars>/<key>.json`.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache { dir, write_lock: Mutex::new(()) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get(&self, request: &CompletionRequest) -> Result<Option<CompletionResponse>, BackendError> {
        let key = cache_key(request);
        let path = self.path_for(&key);
        let raw = match fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(BackendError::Cache(format!("{}: {e}", path.display()))),
        };
        let entry: Entry =
            serde_json::from_slice(&raw).map_err(|e| BackendError::Cache(format!("{}: {e}", path.display())))?;
        if entry.key != key || &entry.request != request {
            return Err(BackendError::Cache(format!("{} does not match its request", path.display())));
        }
        Ok(Some(CompletionResponse { text: entry.text, usage: entry.usage, backend_id: entry.backend_id, cached: true }))
    }

    pub fn put(&self, request: &CompletionRequest, response: &CompletionResponse) -> Result<(), BackendError> {
        let key = cache_key(request);
        let path = self.path_for(&key);
        let entry = Entry {
            key: key.clone(),
            request: request.clone(),
            text: response.text.clone(),
            usage: response.usage,
            backend_id: response.backend_id.clone(),
            stored_at_ms: super::now_ms(),
        };
        let bytes = serde_json::to_vec_pretty(&entry).expect("cache entries serialize");
        let err = |e: io::Error| BackendError::Cache(format!("{}: {e}", path.display()));
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        fs::create_dir_all(path.parent().expect("cache paths have a parent")).map_err(err)?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, bytes).map_err(err)?;
        fs::rename(&tmp, &path).map_err(err)
    }
}
