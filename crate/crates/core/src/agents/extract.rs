use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::chat::{chat_complete, AgentConfig, ChatMessage};
use super::fence::extract_json_fence;
use super::oracle::oracle_extract;
use super::transport::Transport;
use super::AgentError;
use crate::cost::{estimate_tokens, TokenUsage};
use crate::domain::{DocKind, FieldName};
use crate::prompts;

/// The six extraction targets as emitted by an agent. Serialized in schema
/// order with `null` for fields the agent did not report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtractionRecord {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub period_covered: Option<String>,
    #[serde(default)]
    pub address: Option<String>,
    #[serde(default)]
    pub opening_balance: Option<String>,
    #[serde(default)]
    pub closing_balance: Option<String>,
    #[serde(default)]
    pub loan_amount: Option<String>,
}

impl ExtractionRecord {
    pub fn get(&self, field: FieldName) -> Option<&str> {
        match field {
            FieldName::Name => self.name.as_deref(),
            FieldName::PeriodCovered => self.period_covered.as_deref(),
            FieldName::Address => self.address.as_deref(),
            FieldName::OpeningBalance => self.opening_balance.as_deref(),
            FieldName::ClosingBalance => self.closing_balance.as_deref(),
            FieldName::LoanAmount => self.loan_amount.as_deref(),
        }
    }

    pub fn set(&mut self, field: FieldName, value: Option<String>) {
        let slot = match field {
            FieldName::Name => &mut self.name,
            FieldName::PeriodCovered => &mut self.period_covered,
            FieldName::Address => &mut self.address,
            FieldName::OpeningBalance => &mut self.opening_balance,
            FieldName::ClosingBalance => &mut self.closing_balance,
            FieldName::LoanAmount => &mut self.loan_amount,
        };
        *slot = value;
    }

    pub fn with(mut self, field: FieldName, value: impl Into<String>) -> Self {
        self.set(field, Some(value.into()));
        self
    }

    /// The value when it is usable for scoring: present, not blank, and not
    /// the `xxx` schema placeholder.
    pub fn valid(&self, field: FieldName) -> Option<&str> {
        self.get(field).filter(|v| is_valid_value(v))
    }

    /// Builds a record from a model's JSON object. Unknown keys are returned
    /// separately so callers can report them.
    pub fn from_json(value: &Value) -> Option<(ExtractionRecord, Vec<String>)> {
        let obj = value.as_object()?;
        let mut record = ExtractionRecord::default();
        let mut unknown = Vec::new();
        for (key, v) in obj {
            let Some(field) = field_for_key(key) else {
                unknown.push(key.clone());
                continue;
            };
            let text = match v {
                Value::Null => None,
                Value::String(s) => Some(s.clone()),
                Value::Number(n) => Some(n.to_string()),
                Value::Bool(b) => Some(b.to_string()),
                Value::Array(items) => Some(
                    items
                        .iter()
                        .map(|i| i.as_str().map(String::from).unwrap_or_else(|| i.to_string()))
                        .collect::<Vec<_>>()
                        .join(", "),
                ),
                Value::Object(_) => Some(v.to_string()),
            };
            record.set(field, text.filter(|t| !is_placeholder(t)));
        }
        Some((record, unknown))
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

fn field_for_key(key: &str) -> Option<FieldName> {
    let k = key.trim().to_ascii_lowercase().replace([' ', '-'], "_");
    FieldName::ALL.iter().copied().find(|f| f.as_str() == k)
}

fn is_placeholder(v: &str) -> bool {
    v.trim().eq_ignore_ascii_case("xxx")
}

pub(crate) fn is_valid_value(v: &str) -> bool {
    let t = v.trim();
    !t.is_empty() && !is_placeholder(t)
}

/// A record plus what producing it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub record: ExtractionRecord,
    pub usage: Option<TokenUsage>,
    /// Pricing key of the model that produced the record, if any.
    pub model_id: Option<String>,
}

/// Anything that can pull the six target fields out of document text.
pub trait Extractor: Send + Sync {
    /// Stable name, used for output directories (`oracle`, `llm:gpt4`).
    fn name(&self) -> String;

    fn extract(&self, text: &str, kind: DocKind) -> Result<Extraction, AgentError>;
}

/// The rule-based reference extractor for this crate's templates.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleAgent;

impl Extractor for OracleAgent {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn extract(&self, text: &str, kind: DocKind) -> Result<Extraction, AgentError> {
        Ok(Extraction { record: oracle_extract(text, kind)?, usage: None, model_id: None })
    }
}

/// Chat-model extractor driven by the AUDIT prompt.
#[derive(Clone)]
pub struct LlmAgent {
    pub config: AgentConfig,
    pub transport: Arc<dyn Transport>,
}

impl LlmAgent {
    pub fn new(config: AgentConfig, transport: Arc<dyn Transport>) -> Self {
        LlmAgent { config, transport }
    }
}

impl Extractor for LlmAgent {
    fn name(&self) -> String {
        format!("llm:{}", self.config.model_id)
    }

    fn extract(&self, text: &str, _kind: DocKind) -> Result<Extraction, AgentError> {
        llm_extract(text, &self.config, self.transport.as_ref())
    }
}

pub(crate) fn usage_or_estimate(messages: &[ChatMessage], reply: &str, reported: Option<TokenUsage>) -> TokenUsage {
    reported.unwrap_or_else(|| {
        let input = messages.iter().map(|m| estimate_tokens(&m.content)).sum();
        TokenUsage::estimated(input, estimate_tokens(reply))
    })
}

/// Sends the AUDIT prompt over `text` and parses the fenced reply. Replies
/// without parseable JSON are retried up to `config.max_retries` times.
pub fn llm_extract(text: &str, config: &AgentConfig, transport: &dyn Transport) -> Result<Extraction, AgentError> {
    if text.trim().is_empty() {
        return Err(AgentError::InvalidInput("document text is empty".into()));
    }
    let messages = prompts::AUDIT.render(&[("text", text)])?;
    let mut usage: Option<TokenUsage> = None;
    let mut last_problem = String::new();

    for attempt in 0..=config.max_retries {
        let response = chat_complete(&messages, config, transport)?;
        let this = usage_or_estimate(&messages, &response.content, response.usage);
        usage = Some(usage.map_or(this, |u| u.combine(this)));

        let parsed = extract_json_fence(&response.content)
            .map_err(|e| e.to_string())
            .and_then(|v| ExtractionRecord::from_json(&v).ok_or_else(|| "reply JSON is not an object".to_string()));
        match parsed {
            Ok((record, unknown)) => {
                if !unknown.is_empty() {
                    log::warn!("{}: dropping unknown extraction keys {:?}", config.model_id, unknown);
                }
                return Ok(Extraction { record, usage, model_id: Some(config.model_id.clone()) });
            }
            Err(problem) => {
                log::warn!("{}: extraction attempt {} unusable: {problem}", config.model_id, attempt + 1);
                last_problem = problem;
            }
        }
    }
    Err(AgentError::RetriesExhausted { attempts: config.max_retries + 1, last: last_problem })
}
