use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::chat::{AgentConfig, ChatMessage, ChatResponse};
use crate::cost::TokenUsage;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("network error: {message}")]
    Network { message: String, transient: bool },
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("provider rejected credentials (HTTP {status})")]
    Auth { status: u16 },
    #[error("credential environment variable {0} is not set")]
    MissingCredential(String),
    #[error("unexpected provider response: {0}")]
    Protocol(String),
    #[error("no replay fixture for request digest {digest}")]
    FixtureMiss { digest: String },
    #[error("replay fixture {path}: {message}")]
    FixtureInvalid { path: String, message: String },
    #[error("scripted transport has no replies left")]
    ScriptExhausted,
}

impl TransportError {
    pub fn is_transient(&self) -> bool {
        match self {
            TransportError::Network { transient, .. } => *transient,
            TransportError::Http { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }

    pub fn is_fixture_error(&self) -> bool {
        matches!(
            self,
            TransportError::FixtureMiss { .. } | TransportError::FixtureInvalid { .. } | TransportError::ScriptExhausted
        )
    }
}

/// One chat call, as seen by a transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(config: &AgentConfig, messages: Vec<ChatMessage>) -> Self {
        ChatRequest { model_id: config.model_id.clone(), messages }
    }

    /// Fixture key: SHA-256 over the model id and the serialized messages.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.model_id.as_bytes());
        h.update(b"\n");
        h.update(serde_json::to_vec(&self.messages).expect("messages serialize"));
        hex::encode(h.finalize())
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &ChatRequest, config: &AgentConfig) -> Result<ChatResponse, TransportError>;
}

/// Serves queued replies in order and records every request it saw.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<Result<ChatResponse, TransportError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedTransport {
    pub fn new(replies: impl IntoIterator<Item = ChatResponse>) -> Self {
        ScriptedTransport {
            replies: Mutex::new(replies.into_iter().map(Ok).collect()),
            seen: Mutex::default(),
        }
    }

    pub fn from_texts<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Self {
        Self::new(texts.into_iter().map(ChatResponse::text))
    }

    pub fn push(&self, reply: ChatResponse) {
        self.replies.lock().expect("lock").push_back(Ok(reply));
    }

    pub fn push_error(&self, error: TransportError) {
        self.replies.lock().expect("lock").push_back(Err(error));
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().expect("lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("lock").len()
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, request: &ChatRequest, _config: &AgentConfig) -> Result<ChatResponse, TransportError> {
        self.seen.lock().expect("lock").push(request.clone());
        self.replies.lock().expect("lock").pop_front().unwrap_or(Err(TransportError::ScriptExhausted))
    }
}

/// A recorded request/response, stored as `<digest>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFixture {
    pub digest: String,
    pub model_id: String,
    pub messages: Vec<ChatMessage>,
    pub content: String,
    #[serde(default)]
    pub usage: Option<TokenUsage>,
}

impl ReplayFixture {
    pub fn new(request: &ChatRequest, response: &ChatResponse) -> Self {
        ReplayFixture {
            digest: request.digest(),
            model_id: request.model_id.clone(),
            messages: request.messages.clone(),
            content: response.content.clone(),
            usage: response.usage,
        }
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.digest));
        let mut body = serde_json::to_string_pretty(self).expect("fixture serializes");
        body.push('\n');
        crate::corpus::write_atomic(&path, body.as_bytes())?;
        Ok(path)
    }
}

/// Serves recorded responses keyed by request digest.
#[derive(Debug, Default)]
pub struct ReplayTransport {
    fixtures: HashMap<String, ReplayFixture>,
}

impl ReplayTransport {
    pub fn new(fixtures: impl IntoIterator<Item = ReplayFixture>) -> Self {
        ReplayTransport { fixtures: fixtures.into_iter().map(|f| (f.digest.clone(), f)).collect() }
    }

    /// Loads every `*.json` fixture in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, TransportError> {
        let invalid = |path: &Path, message: String| TransportError::FixtureInvalid { path: path.display().to_string(), message };
        let entries = fs::read_dir(dir).map_err(|e| invalid(dir, e.to_string()))?;
        let mut fixtures = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| invalid(dir, e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let raw = fs::read_to_string(&path).map_err(|e| invalid(&path, e.to_string()))?;
            let f: ReplayFixture = serde_json::from_str(&raw).map_err(|e| invalid(&path, e.to_string()))?;
            fixtures.push(f);
        }
        Ok(ReplayTransport::new(fixtures))
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &ChatRequest, _config: &AgentConfig) -> Result<ChatResponse, TransportError> {
        let digest = request.digest();
        self.fixtures
            .get(&digest)
            .map(|f| ChatResponse { content: f.content.clone(), usage: f.usage })
            .ok_or(TransportError::FixtureMiss { digest })
    }
}

/// Forwards to `inner` and writes each successful exchange as a replay fixture.
pub struct RecordingTransport<T> {
    inner: T,
    dir: PathBuf,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, dir: impl Into<PathBuf>) -> Self {
        RecordingTransport { inner, dir: dir.into() }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, request: &ChatRequest, config: &AgentConfig) -> Result<ChatResponse, TransportError> {
        let response = self.inner.send(request, config)?;
        ReplayFixture::new(request, &response).write_to(&self.dir).map_err(|e| TransportError::FixtureInvalid {
            path: self.dir.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(response)
    }
}

/// OpenAI-compatible `POST {endpoint}/chat/completions`.
#[derive(Debug, Default, Clone)]
pub struct HttpTransport;

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    #[serde(default)]
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

pub fn completions_url(endpoint: &str) -> String {
    let base = endpoint.trim_end_matches('/');
    if base.ends_with("/chat/completions") {
        base.to_string()
    } else {
        format!("{base}/chat/completions")
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ChatRequest, config: &AgentConfig) -> Result<ChatResponse, TransportError> {
        let key = match &config.credential_ref {
            Some(var) => Some(std::env::var(var).map_err(|_| TransportError::MissingCredential(var.clone()))?),
            None => None,
        };
        let body = serde_json::to_string(&WireRequest {
            model: config.provider_model(),
            messages: &request.messages,
            temperature: config.temperature,
        })
        .expect("request serializes");

        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.request_timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let mut req = agent.post(&completions_url(&config.provider_endpoint)).header("Content-Type", "application/json");
        if let Some(key) = &key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = req.send(body.as_str()).map_err(network_error)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(network_error)?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(TransportError::Auth { status }),
            _ => return Err(TransportError::Http { status, body: text.chars().take(500).collect() }),
        }

        let wire: WireResponse =
            serde_json::from_str(&text).map_err(|e| TransportError::Protocol(format!("{e}: {}", text.chars().take(200).collect::<String>())))?;
        let content = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError::Protocol("response has no choices[0].message.content".into()))?;
        Ok(ChatResponse {
            content,
            usage: wire.usage.map(|u| TokenUsage::reported(u.prompt_tokens, u.completion_tokens)),
        })
    }
}

fn network_error(e: ureq::Error) -> TransportError {
    let transient = matches!(
        e,
        ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound
    );
    TransportError::Network { message: e.to_string(), transient }
}
