use std::fmt;

use audit_core::agents::{AgentError, VerifyError};
use audit_core::corpus::CorpusError;
use audit_core::cost::CostError;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Other,
    Usage,
    Filesystem,
    Transport,
    Fixture,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Other => 1,
            ErrorClass::Usage => 2,
            ErrorClass::Filesystem => 3,
            ErrorClass::Transport => 4,
            ErrorClass::Fixture => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError { class, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorClass::Usage, message)
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn agent_class(e: &AgentError) -> ErrorClass {
    if e.is_fixture_error() {
        ErrorClass::Fixture
    } else if e.is_transport_error() {
        ErrorClass::Transport
    } else {
        ErrorClass::Other
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        let class = match e {
            CorpusError::Io { .. } | CorpusError::Missing(_) => ErrorClass::Filesystem,
            CorpusError::Json { .. } | CorpusError::Render(_) => ErrorClass::Other,
        };
        CliError::new(class, e.to_string())
    }
}

impl From<AgentError> for CliError {
    fn from(e: AgentError) -> Self {
        CliError::new(agent_class(&e), e.to_string())
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        CliError::new(agent_class(&e.source), e.to_string())
    }
}

impl From<CostError> for CliError {
    fn from(e: CostError) -> Self {
        let class = match e {
            CostError::PricingFile { .. } => ErrorClass::Filesystem,
            _ => ErrorClass::Other,
        };
        CliError::new(class, e.to_string())
    }
}

/// Combines per-document failures into one error. Fixture problems win
/// over transport problems, which win over the rest.
pub fn summarize_failures(stage: &str, failures: &[(String, CliError)]) -> Option<CliError> {
    if failures.is_empty() {
        return None;
    }
    let rank = |c: ErrorClass| match c {
        ErrorClass::Fixture => 4,
        ErrorClass::Transport => 3,
        ErrorClass::Filesystem => 2,
        ErrorClass::Usage => 1,
        ErrorClass::Other => 0,
    };
    let class = failures.iter().map(|(_, e)| e.class).max_by_key(|c| rank(*c)).expect("nonempty");
    let first = &failures[0];
    Some(CliError::new(
        class,
        format!("{stage}: {} document(s) failed; first: {}: {}", failures.len(), first.0, first.1),
    ))
}
