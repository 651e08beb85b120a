//! The `audit` command line: generate a corpus, extract, verify, evaluate
//! and price, each stage reading and writing files under `--corpus-dir`.

mod agents;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use audit_core::evaluate::ReportFormat;

pub use agents::{check_selector, AgentFactory, KNOWN_MODELS};
pub use config::RunConfig;
pub use error::{CliError, ErrorClass};

#[derive(Debug, Parser)]
#[command(name = "audit", version, about = "Synthetic loan-audit corpus, extraction and verification pipeline")]
pub struct Cli {
    /// Corpus directory (default: `corpus`, or the config file's value).
    #[arg(long, global = true)]
    pub corpus_dir: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Format printed to stdout for reports: md, csv or json.
    #[arg(long, global = true)]
    pub format: Option<ReportFormat>,
    /// Serve LLM requests from recorded fixtures in this directory instead of the network.
    #[arg(long, global = true)]
    pub replay: Option<PathBuf>,
    /// Maximum concurrent requests per LLM agent.
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GenerateArgs {
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct AgentArgs {
    /// `oracle` or `llm:<model_id>`; repeatable.
    #[arg(long = "agent")]
    pub agents: Vec<String>,
}

#[derive(Debug, Args, Default)]
pub struct RecordArgs {
    /// Write every live exchange as a replay fixture into this directory.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct VerifyArgs {
    /// Second agent for dual verification (default: the first agent again).
    #[arg(long)]
    pub second_agent: Option<String>,
    /// Third agent consulted on conflicted documents.
    #[arg(long)]
    pub tie_break: Option<String>,
    /// Skip dual-agent verification and only cross-check pairs.
    #[arg(long)]
    pub no_dual: bool,
}

#[derive(Debug, Args, Default)]
pub struct CostArgs {
    /// Pricing table (JSON array of model_id, provider, input/output price per 1M tokens).
    #[arg(long)]
    pub pricing: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labeled bank/loan pairs and render them to documents.
    Generate(GenerateArgs),
    /// Extract the target fields from every document.
    Extract {
        #[command(flatten)]
        agents: AgentArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
    /// Dual-agent verification and bank/loan cross-checks.
    Verify {
        #[command(flatten)]
        agents: AgentArgs,
        #[command(flatten)]
        verify: VerifyArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
    /// Score extractions against labels and write accuracy tables.
    Evaluate {
        #[command(flatten)]
        agents: AgentArgs,
    },
    /// Price recorded token usage.
    Cost(CostArgs),
    /// generate, extract, verify, evaluate and cost in order.
    RunAll {
        #[command(flatten)]
        generate: GenerateArgs,
        #[command(flatten)]
        agents: AgentArgs,
        #[command(flatten)]
        verify: VerifyArgs,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
}

fn apply_generate(c: &mut RunConfig, g: &GenerateArgs) {
    if let Some(p) = g.pairs {
        c.n_pairs = p;
    }
    if let Some(s) = g.seed {
        c.seed = s;
    }
}

fn apply_agents(c: &mut RunConfig, a: &AgentArgs) -> Result<(), CliError> {
    for s in &a.agents {
        check_selector(s)?;
    }
    if !a.agents.is_empty() {
        c.extractors = a.agents.clone();
    }
    Ok(())
}

fn apply_verify(c: &mut RunConfig, v: &VerifyArgs) -> Result<(), CliError> {
    for s in v.second_agent.iter().chain(&v.tie_break) {
        check_selector(s)?;
    }
    if v.second_agent.is_some() {
        c.second_agent = v.second_agent.clone();
    }
    if v.tie_break.is_some() {
        c.tie_break = v.tie_break.clone();
    }
    if v.no_dual {
        c.dual_agent = false;
    }
    Ok(())
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.corpus_dir {
        config.corpus_dir = d.clone();
    }
    if let Some(n) = cli.concurrency {
        config.concurrency_limit = n;
    }
    let mut record = None;
    match &cli.command {
        Command::Generate(g) => apply_generate(&mut config, g),
        Command::Extract { agents, record: r } => {
            apply_agents(&mut config, agents)?;
            record = r.record.clone();
        }
        Command::Verify { agents, verify, record: r } => {
            apply_agents(&mut config, agents)?;
            apply_verify(&mut config, verify)?;
            record = r.record.clone();
        }
        Command::Evaluate { agents } => apply_agents(&mut config, agents)?,
        Command::Cost(c) => {
            if c.pricing.is_some() {
                config.pricing_path = c.pricing.clone();
            }
        }
        Command::RunAll { generate, agents, verify, cost, record: r } => {
            apply_generate(&mut config, generate);
            apply_agents(&mut config, agents)?;
            apply_verify(&mut config, verify)?;
            if cost.pricing.is_some() {
                config.pricing_path = cost.pricing.clone();
            }
            record = r.record.clone();
        }
    }
    config.validate()?;
    for s in config.extractors.iter().chain(&config.second_agent).chain(&config.tie_break) {
        check_selector(s)?;
    }
    if record.is_some() && cli.replay.is_some() {
        return Err(CliError::usage("--record and --replay cannot be combined"));
    }

    let replay = cli.replay.clone();
    let config_for_factory = config.clone();
    let factory = AgentFactory::new(&config_for_factory, replay.as_deref(), record.as_deref());
    let mut ctx = commands::Context { config, format: cli.format.unwrap_or_default(), replay: cli.replay.clone(), out };
    match cli.command {
        Command::Generate(_) => commands::generate(&mut ctx).map(|_| ()),
        Command::Extract { .. } => commands::extract(&mut ctx, &factory),
        Command::Verify { .. } => commands::verify(&mut ctx, &factory).map(|_| ()),
        Command::Evaluate { .. } => commands::evaluate(&mut ctx, &factory).map(|_| ()),
        Command::Cost(_) => commands::cost(&mut ctx).map(|_| ()),
        Command::RunAll { .. } => commands::run_all(&mut ctx, &factory),
    }
}

/// Parses `args` and runs them; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ErrorClass::Usage.exit_code() } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
