use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::transport::{ChatRequest, Transport, TransportError};
use crate::cost::TokenUsage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    #[serde(default)]
    pub usage: Option<TokenUsage>,
}

impl ChatResponse {
    pub fn text(content: impl Into<String>) -> Self {
        ChatResponse { content: content.into(), usage: None }
    }
}

fn default_max_retries() -> u32 {
    2
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_backoff_ms() -> u64 {
    500
}

/// How to reach one chat model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    /// Short model key (`gpt4`, `llama3_70b`, ...), also the pricing key.
    pub model_id: String,
    /// Model name sent to the provider; defaults to `model_id`.
    #[serde(default)]
    pub provider_model: Option<String>,
    /// Base URL of an OpenAI-compatible API, e.g. `https://api.openai.com/v1`.
    pub provider_endpoint: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub credential_ref: Option<String>,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub request_timeout_secs: u64,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

impl AgentConfig {
    /// Defaults for the models in the shipped pricing table; anything else
    /// points at a local OpenAI-compatible server.
    pub fn for_model(model_id: &str) -> Self {
        let (endpoint, credential, provider_model) = match model_id {
            "gpt4" => ("https://api.openai.com/v1", Some("OPENAI_API_KEY"), "gpt-4"),
            "llama3_70b" => ("https://openai-proxy.replicate.com/v1", Some("REPLICATE_API_TOKEN"), "meta/meta-llama-3-70b-instruct"),
            "llama2_70b" => ("https://openai-proxy.replicate.com/v1", Some("REPLICATE_API_TOKEN"), "meta/llama-2-70b-chat"),
            "dbrx" => ("https://api.together.xyz/v1", Some("TOGETHER_API_KEY"), "databricks/dbrx-instruct"),
            other => ("http://localhost:8000/v1", None, other),
        };
        AgentConfig {
            model_id: model_id.to_string(),
            provider_model: Some(provider_model.to_string()),
            provider_endpoint: endpoint.to_string(),
            credential_ref: credential.map(String::from),
            temperature: 0.0,
            max_retries: default_max_retries(),
            request_timeout_secs: default_timeout_secs(),
            backoff_base_ms: default_backoff_ms(),
        }
    }

    pub fn provider_model(&self) -> &str {
        self.provider_model.as_deref().unwrap_or(&self.model_id)
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout_secs)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.model_id.trim().is_empty() {
            return Err("model_id is empty".into());
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(format!("temperature must be >= 0, got {}", self.temperature));
        }
        Ok(())
    }
}

/// Sends `messages` through `transport`, retrying transient failures with
/// exponential backoff up to `config.max_retries` times.
pub fn chat_complete(
    messages: &[ChatMessage],
    config: &AgentConfig,
    transport: &dyn Transport,
) -> Result<ChatResponse, TransportError> {
    if messages.is_empty() {
        return Err(TransportError::InvalidRequest("message list is empty".into()));
    }
    if let Some(i) = messages.iter().position(|m| m.content.is_empty()) {
        return Err(TransportError::InvalidRequest(format!("message {i} has empty content")));
    }
    config.validate().map_err(TransportError::InvalidRequest)?;

    let request = ChatRequest::new(config, messages.to_vec());
    let mut attempt = 0;
    loop {
        match transport.send(&request, config) {
            Ok(r) => return Ok(r),
            Err(e) if e.is_transient() && attempt < config.max_retries => {
                let delay = config.backoff_base_ms.saturating_mul(1 << attempt.min(16));
                log::warn!("{} request failed ({e}); retry {} in {delay} ms", config.model_id, attempt + 1);
                thread::sleep(Duration::from_millis(delay));
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
