//! Model-driven generation through the BANK_INFO and LOAN_INFO prompts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{check_consistency, GenerationHistory};
use crate::agents::{chat_complete, extract_json_fence, AgentConfig, AgentError, ChatMessage, Transport};
use crate::domain::{BankStatement, LoanApplication};
use crate::prompts;

/// Re-prompts after the first attempt.
pub const MAX_GENERATION_RETRIES: u32 = 3;

#[derive(Debug, Error)]
pub enum LlmGenError<T: std::fmt::Debug> {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("generated document rejected after {attempts} attempts: {}", .problems.join("; "))]
    Rejected { attempts: u32, problems: Vec<String>, last_candidate: Option<Box<T>> },
}

impl<T: std::fmt::Debug> From<crate::agents::TransportError> for LlmGenError<T> {
    fn from(e: crate::agents::TransportError) -> Self {
        LlmGenError::Agent(e.into())
    }
}

impl<T: std::fmt::Debug> From<crate::prompts::PromptError> for LlmGenError<T> {
    fn from(e: crate::prompts::PromptError) -> Self {
        LlmGenError::Agent(e.into())
    }
}

#[derive(Serialize)]
struct HistoryEntry<'a> {
    name: &'a str,
    account_number: &'a str,
}

pub fn history_json(history: &GenerationHistory) -> String {
    let entries: Vec<HistoryEntry> =
        history.entries().iter().map(|(n, a)| HistoryEntry { name: n, account_number: a }).collect();
    serde_json::to_string(&entries).expect("history serializes")
}

/// Identity fields the loan application must repeat from the bank statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserInformation {
    pub first_name: String,
    pub last_name: String,
    pub address: String,
}

impl UserInformation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("user information serializes")
    }

    fn mismatches(&self, loan: &LoanApplication) -> Vec<String> {
        let a = &loan.applicant;
        [("first_name", &self.first_name, &a.first_name), ("last_name", &self.last_name, &a.last_name), ("address", &self.address, &a.address)]
            .into_iter()
            .filter(|(_, want, got)| want != got)
            .map(|(f, want, got)| format!("applicant {f} must be {want:?}, got {got:?}"))
            .collect()
    }
}

fn rejection_message(problems: &[String]) -> String {
    let mut s = String::from("The previous output was rejected for these reasons:\n");
    for p in problems {
        s.push_str("- ");
        s.push_str(p);
        s.push('\n');
    }
    s.push_str("Generate the output again, following all requirements.");
    s
}

/// Sends `messages`, parses each reply with `accept`, and re-prompts with
/// the reported problems until a reply is accepted or retries run out.
fn generate<T: std::fmt::Debug>(
    mut messages: Vec<ChatMessage>,
    config: &AgentConfig,
    transport: &dyn Transport,
    accept: impl Fn(serde_json::Value) -> Result<T, (Vec<String>, Option<T>)>,
) -> Result<T, LlmGenError<T>> {
    let mut problems = Vec::new();
    let mut last_candidate = None;
    for attempt in 0..=MAX_GENERATION_RETRIES {
        if attempt > 0 {
            messages.push(ChatMessage::user(rejection_message(&problems)));
        }
        let reply = chat_complete(&messages, config, transport)?;
        let outcome = match extract_json_fence(&reply.content) {
            Ok(v) => accept(v),
            Err(e) => Err((vec![e.to_string()], None)),
        };
        match outcome {
            Ok(doc) => return Ok(doc),
            Err((p, candidate)) => {
                log::warn!("{}: generation attempt {} rejected: {}", config.model_id, attempt + 1, p.join("; "));
                problems = p;
                if candidate.is_some() {
                    last_candidate = candidate;
                }
            }
        }
        messages.push(ChatMessage::assistant(reply.content));
    }
    Err(LlmGenError::Rejected {
        attempts: MAX_GENERATION_RETRIES + 1,
        problems,
        last_candidate: last_candidate.map(Box::new),
    })
}

/// Asks the model for a fresh bank statement. Replies are rejected when
/// they fail the ledger checks or reuse a name or account from `history`.
pub fn llm_generate_bank_info(
    history: &GenerationHistory,
    config: &AgentConfig,
    transport: &dyn Transport,
) -> Result<BankStatement, LlmGenError<BankStatement>> {
    let messages = prompts::BANK_INFO.render(&[("history", &history_json(history))])?;
    generate(messages, config, transport, |v| {
        let s: BankStatement = serde_json::from_value(v).map_err(|e| (vec![format!("reply does not match the sample format: {e}")], None))?;
        let mut problems: Vec<String> = check_consistency(&s).iter().map(ToString::to_string).collect();
        if history.contains_name(&s.holder.name) {
            problems.push(format!("name {:?} already appears in the history", s.holder.name));
        }
        if history.contains_account(&s.account_number) {
            problems.push(format!("account number {:?} already appears in the history", s.account_number));
        }
        if problems.is_empty() {
            Ok(s)
        } else {
            Err((problems, Some(s)))
        }
    })
}

/// Asks the model for a loan application for the person in `user_information`.
pub fn llm_generate_loan_info(
    user_information: &UserInformation,
    config: &AgentConfig,
    transport: &dyn Transport,
) -> Result<LoanApplication, LlmGenError<LoanApplication>> {
    let messages = prompts::LOAN_INFO.render(&[("user_information", &user_information.to_json())])?;
    generate(messages, config, transport, |v| {
        let loan: LoanApplication =
            serde_json::from_value(v).map_err(|e| (vec![format!("reply does not match the sample format: {e}")], None))?;
        let mut problems = loan.validate();
        problems.extend(user_information.mismatches(&loan));
        if problems.is_empty() {
            Ok(loan)
        } else {
            Err((problems, Some(loan)))
        }
    })
}
