use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use audit_core::agents::AgentConfig;

use crate::error::{CliError, ErrorClass};

/// Settings shared by every subcommand. Loaded from `--config` when given;
/// command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub seed: u64,
    pub n_pairs: usize,
    /// Extraction agents to run, `oracle` or `llm:<model_id>`.
    pub extractors: Vec<String>,
    /// Connection settings for `llm:` agents, keyed by `model_id`.
    pub agents: Vec<AgentConfig>,
    pub dual_agent: bool,
    /// Second agent for dual verification; defaults to the first extractor.
    pub second_agent: Option<String>,
    /// Third agent consulted on conflicts.
    pub tie_break: Option<String>,
    pub pricing_path: Option<PathBuf>,
    pub concurrency_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_dir: PathBuf::from("corpus"),
            seed: 7,
            n_pairs: 49,
            extractors: vec!["oracle".into()],
            agents: Vec::new(),
            dual_agent: true,
            second_agent: None,
            tie_break: None,
            pricing_path: None,
            concurrency_limit: 4,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new(ErrorClass::Filesystem, format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.concurrency_limit == 0 {
            return Err(CliError::usage("concurrency_limit must be at least 1"));
        }
        if self.extractors.is_empty() {
            return Err(CliError::usage("no extraction agents selected"));
        }
        for a in &self.agents {
            a.validate().map_err(|e| CliError::usage(format!("agent {}: {e}", a.model_id)))?;
        }
        Ok(())
    }

    /// Connection settings for `model_id`, falling back to built-in defaults.
    pub fn agent_config(&self, model_id: &str) -> AgentConfig {
        self.agents.iter().find(|a| a.model_id == model_id).cloned().unwrap_or_else(|| AgentConfig::for_model(model_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"n_pairs": 3, "agents": [{"model_id": "m", "provider_endpoint": "http://x/v1"}]}"#).unwrap();
        assert_eq!(c.n_pairs, 3);
        assert_eq!(c.concurrency_limit, 4);
        assert_eq!(c.agent_config("m").provider_endpoint, "http://x/v1");
        assert_eq!(c.agent_config("gpt4").credential_ref.as_deref(), Some("OPENAI_API_KEY"));
        assert!(serde_json::from_str::<RunConfig>(r#"{"api_key": "x"}"#).is_err());
    }

    #[test]
    fn zero_concurrency_is_rejected() {
        let c = RunConfig { concurrency_limit: 0, ..RunConfig::default() };
        assert_eq!(c.validate().unwrap_err().class, ErrorClass::Usage);
    }
}
