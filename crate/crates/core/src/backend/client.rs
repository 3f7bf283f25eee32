use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, CompletionRequest, CompletionResponse, ResponseCache};

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Exponential backoff for transient transport failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 4, initial_delay: Duration::from_millis(500), max_delay: Duration::from_secs(16) }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy { max_retries: 0, ..Self::default() }
    }

    pub fn immediate(max_retries: u32) -> Self {
        RetryPolicy { max_retries, initial_delay: Duration::ZERO, max_delay: Duration::ZERO }
    }

    pub fn delay(&self, attempt: u32) -> Duration {
        self.initial_delay.saturating_mul(2u32.saturating_pow(attempt)).min(self.max_delay)
    }
}

/// Spaces dispatches at least `min_interval` apart across all threads.
#[derive(Debug, Default)]
pub struct RateLimiter {
    min_interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter { min_interval, next_slot: Mutex::new(None) }
    }

    pub fn per_minute(requests: u32) -> Self {
        Self::new(Duration::from_secs(60) / requests.max(1))
    }

    pub fn acquire(&self) {
        if self.min_interval.is_zero() {
            return;
        }
        let wait = {
            let mut slot = self.next_slot.lock().unwrap_or_else(|p| p.into_inner());
            let now = Instant::now();
            let start = slot.map_or(now, |s| s.max(now));
            *slot = Some(start + self.min_interval);
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

/// One request/response exchange as written to transcripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub request: CompletionRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<CompletionResponse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub started_at_ms: u128,
    pub finished_at_ms: u128,
}

/// Cache-first completion with retries and rate limiting; shareable across threads.
pub struct CompletionClient {
    backend: Arc<dyn Backend>,
    cache: Option<ResponseCache>,
    retry: RetryPolicy,
    limiter: RateLimiter,
    model: String,
}

impl CompletionClient {
    pub fn new(backend: impl Backend + 'static) -> Self {
        CompletionClient {
            backend: Arc::new(backend),
            cache: None,
            retry: RetryPolicy::default(),
            limiter: RateLimiter::default(),
            model: super::DEFAULT_MODEL.to_string(),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_rate_limit(mut self, limiter: RateLimiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(request)? {
                return Ok(hit);
            }
        }
        let mut attempt = 0;
        let response = loop {
            self.limiter.acquire();
            match self.backend.complete(request) {
                Ok(r) => break r,
                Err(e) if e.is_transient() && attempt < self.retry.max_retries => {
                    let delay = self.retry.delay(attempt);
                    log::warn!("transient backend error ({e}); retry {} in {delay:?}", attempt + 1);
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        };
        if let Some(cache) = &self.cache {
            cache.put(request, &response)?;
        }
        Ok(response)
    }

    /// [`Self::complete`] with timestamps, as a transcript entry.
    pub fn call(&self, request: CompletionRequest) -> CallRecord {
        let started_at_ms = now_ms();
        let result = self.complete(&request);
        let finished_at_ms = now_ms();
        let (response, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        CallRecord { request, response, error, started_at_ms, finished_at_ms }
    }
}

/// Applies `f` to every item on at most `parallelism` threads; results keep item order.
pub fn map_bounded<T, R, F>(items: &[T], parallelism: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = parallelism.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().expect("every slot is filled")).collect()
}
