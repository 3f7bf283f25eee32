//! Text-completion backends behind one interface, with an on-disk response
//! cache, retries and offline mock models.

mod cache;
mod client;
mod http;
mod mock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_key, ResponseCache};
pub use client::{map_bounded, now_ms, CallRecord, CompletionClient, RateLimiter, RetryPolicy};
pub use http::{HttpBackend, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT};
pub use mock::{FixedBackend, FnBackend, OracleBackend, RandomTextBackend, ScriptedBackend};

pub const DEFAULT_MODEL: &str = "text-davinci-003";
pub const REASONING_MAX_TOKENS: u32 = 256;
pub const EXTRACTION_MAX_TOKENS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("transport error: {message}")]
    Transport { message: String, transient: bool },
    #[error("prompt exceeds the model's context length: {0}")]
    ContextLength(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("mock backend cannot interpret the prompt: {0}")]
    UnparseablePrompt(String),
    #[error("no scripted completion for prompt starting {0:?}")]
    UnknownPrompt(String),
    #[error("response cache: {0}")]
    Cache(String),
}

impl BackendError {
    pub fn is_transient(&self) -> bool {
        matches!(self, BackendError::Transport { transient: true, .. })
    }
}

/// Sampling defaults are temperature 0 and top_p 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Vec<String>>,
}

impl CompletionRequest {
    pub fn new(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest {
            model: model.into(),
            prompt: prompt.into(),
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: REASONING_MAX_TOKENS,
            stop: None,
        }
    }

    pub fn extraction(model: impl Into<String>, prompt: impl Into<String>) -> Self {
        CompletionRequest { max_tokens: EXTRACTION_MAX_TOKENS, ..Self::new(model, prompt) }
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResponse {
    /// Raw continuation, untrimmed.
    pub text: String,
    #[serde(default)]
    pub usage: TokenUsage,
    pub backend_id: String,
    #[serde(default)]
    pub cached: bool,
}

impl CompletionResponse {
    pub fn new(text: impl Into<String>, backend_id: impl Into<String>) -> Self {
        CompletionResponse { text: text.into(), usage: TokenUsage::default(), backend_id: backend_id.into(), cached: false }
    }
}

/// A text-completion model.
pub trait Backend: Send + Sync {
    fn id(&self) -> String;

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResponse, BackendError> {
        (**self).complete(request)
    }
}
