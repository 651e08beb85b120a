//! Chat transports, extraction agents, and cross-verification.

mod chat;
mod extract;
mod fence;
mod oracle;
mod transport;
mod verify;

use thiserror::Error;

pub use chat::{chat_complete, AgentConfig, ChatMessage, ChatResponse, Role};
pub use extract::{llm_extract, Extraction, ExtractionRecord, Extractor, LlmAgent, OracleAgent};
pub use fence::{extract_json_fence, fence_wrap, parse_json_lenient, FenceError};
pub use oracle::{oracle_extract, OracleError};
pub use transport::{
    completions_url, ChatRequest, HttpTransport, RecordingTransport, ReplayFixture, ReplayTransport, ScriptedTransport,
    Transport, TransportError,
};
pub use verify::{
    compare_records, cross_check_pair, dual_agent_verify, dual_agent_verify_with_tie_break, FieldVerdict,
    PairVerification, Side, SharedFieldResult, TieBreak, VerificationOutcome, VerificationStatus, VerifyError,
};

pub(crate) use extract::usage_or_estimate;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Fence(#[from] FenceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Prompt(#[from] crate::prompts::PromptError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no usable reply after {attempts} attempts; last problem: {last}")]
    RetriesExhausted { attempts: u32, last: String },
}

impl AgentError {
    /// True when the failure came from a replay or scripted fixture.
    pub fn is_fixture_error(&self) -> bool {
        matches!(self, AgentError::Transport(t) if t.is_fixture_error())
    }

    pub fn is_transport_error(&self) -> bool {
        matches!(self, AgentError::Transport(t) if !t.is_fixture_error())
    }
}
