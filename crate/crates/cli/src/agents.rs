use std::path::Path;
use std::sync::{Arc, OnceLock};

use audit_core::agents::{Extractor, HttpTransport, LlmAgent, OracleAgent, RecordingTransport, ReplayTransport, Transport};

use crate::config::RunConfig;
use crate::error::{CliError, ErrorClass};

pub const KNOWN_MODELS: &[&str] = &["gpt4", "llama3_70b", "llama2_70b", "dbrx"];

fn valid_agents() -> String {
    let models: Vec<String> = KNOWN_MODELS.iter().map(|m| format!("llm:{m}")).collect();
    format!("oracle, {} or llm:<model_id>", models.join(", "))
}

/// Checks an agent selector without building anything.
pub fn check_selector(selector: &str) -> Result<(), CliError> {
    match selector.split_once(':') {
        None if selector == "oracle" => Ok(()),
        Some(("llm", model)) if !model.trim().is_empty() => Ok(()),
        _ => Err(CliError::usage(format!("unknown agent {selector:?}; valid agents: {}", valid_agents()))),
    }
}

/// Builds extractors on demand and shares one transport between LLM agents.
pub struct AgentFactory<'a> {
    config: &'a RunConfig,
    replay: Option<&'a Path>,
    record: Option<&'a Path>,
    transport: OnceLock<Arc<dyn Transport>>,
}

impl<'a> AgentFactory<'a> {
    pub fn new(config: &'a RunConfig, replay: Option<&'a Path>, record: Option<&'a Path>) -> Self {
        AgentFactory { config, replay, record, transport: OnceLock::new() }
    }

    fn transport(&self) -> Result<Arc<dyn Transport>, CliError> {
        if let Some(t) = self.transport.get() {
            return Ok(t.clone());
        }
        let t: Arc<dyn Transport> = match (self.replay, self.record) {
            (Some(dir), _) => {
                let r = ReplayTransport::from_dir(dir).map_err(|e| CliError::new(ErrorClass::Fixture, e.to_string()))?;
                log::info!("replaying {} fixtures from {}", r.len(), dir.display());
                Arc::new(r)
            }
            (None, Some(dir)) => Arc::new(RecordingTransport::new(HttpTransport, dir)),
            (None, None) => Arc::new(HttpTransport),
        };
        Ok(self.transport.get_or_init(|| t).clone())
    }

    pub fn build(&self, selector: &str) -> Result<Box<dyn Extractor>, CliError> {
        check_selector(selector)?;
        match selector.split_once(':') {
            Some((_, model)) => Ok(Box::new(LlmAgent::new(self.config.agent_config(model.trim()), self.transport()?))),
            None => Ok(Box::new(OracleAgent)),
        }
    }
}

pub fn is_llm(selector: &str) -> bool {
    selector.starts_with("llm:")
}
