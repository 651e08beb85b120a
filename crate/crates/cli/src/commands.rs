use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use audit_core::agents::{Extractor, ExtractionRecord, VerificationOutcome, VerificationStatus, cross_check_pair};
use audit_core::corpus::{
    agent_slug, load_labels, load_manifest, load_text, read_json, render_pairs, write_corpus, write_json, write_text,
    CorpusLayout, Manifest,
};
use audit_core::cost::{corpus_cost, emit_cost_report, PricingTable, UsageRecord};
use audit_core::datagen::{generate_corpus_with, DatagenError, GenParams};
use audit_core::domain::DocKind;
use audit_core::evaluate::{aggregate, emit_report, evaluate_record, AccuracyTable, ReportFormat, ScoredDocument};
use audit_core::par::{self, Parallelism};

use crate::agents::{check_selector, is_llm, AgentFactory};
use crate::config::RunConfig;
use crate::error::{summarize_failures, CliError, ErrorClass};

const FORMATS: [ReportFormat; 3] = [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json];

/// State shared by the subcommands of one invocation.
pub struct Context<'a> {
    pub config: RunConfig,
    pub format: ReportFormat,
    pub replay: Option<PathBuf>,
    pub out: &'a mut dyn Write,
}

impl Context<'_> {
    pub fn layout(&self) -> CorpusLayout {
        CorpusLayout::new(&self.config.corpus_dir)
    }

    fn say(&mut self, line: impl AsRef<str>) -> Result<(), CliError> {
        writeln!(self.out, "{}", line.as_ref()).map_err(|e| CliError::new(ErrorClass::Filesystem, format!("stdout: {e}")))
    }

    fn mode_for(&self, selector: &str) -> Parallelism {
        if is_llm(selector) {
            Parallelism::bounded(self.config.concurrency_limit)
        } else {
            Parallelism::default()
        }
    }

    fn manifest(&self) -> Result<Manifest, CliError> {
        load_manifest(&self.layout()).map_err(|e| match e {
            audit_core::corpus::CorpusError::Missing(p) => CliError::new(
                ErrorClass::Filesystem,
                format!("no corpus at {} ({} is missing; run `audit generate` first)", self.config.corpus_dir.display(), p.display()),
            ),
            other => other.into(),
        })
    }
}

fn doc_key(id: &str, kind: DocKind) -> String {
    format!("{id}.{kind}")
}

pub fn generate(ctx: &mut Context<'_>) -> Result<Manifest, CliError> {
    if ctx.config.n_pairs == 0 {
        return Err(CliError::usage("--pairs must be at least 1"));
    }
    let params = GenParams::with_pairs(ctx.config.seed, ctx.config.n_pairs);
    let pairs = generate_corpus_with(&params, Parallelism::default()).map_err(|e| match e {
        DatagenError::InvalidParams(_) | DatagenError::NamePoolExhausted { .. } => CliError::usage(e.to_string()),
    })?;
    let rendered = render_pairs(&pairs, Parallelism::default()).map_err(|e| CliError::new(ErrorClass::Other, e.to_string()))?;
    let manifest = write_corpus(&ctx.layout(), &params, &rendered)?;
    let dist: Vec<String> = manifest.template_distribution().iter().map(|(t, n)| format!("{t}={n}")).collect();
    let n = manifest.pairs.len();
    let dir = ctx.config.corpus_dir.display().to_string();
    ctx.say(format!("generated {n} pairs ({n} bank + {n} loan documents) in {dir}"))?;
    ctx.say(format!("bank templates: {}", dist.join(", ")))?;
    Ok(manifest)
}

fn run_extraction(
    layout: &CorpusLayout,
    docs: &[(String, DocKind)],
    agent: &dyn Extractor,
    mode: Parallelism,
) -> Vec<Result<(ExtractionRecord, Option<UsageRecord>), (String, CliError)>> {
    par::map(docs, mode, |(id, kind)| {
        let key = doc_key(id, *kind);
        let text = load_text(layout, id, *kind).map_err(|e| (key.clone(), CliError::from(e)))?;
        let e = agent.extract(&text, *kind).map_err(|e| (key.clone(), CliError::from(e)))?;
        let usage = match (e.usage, e.model_id) {
            (Some(usage), Some(model_id)) => Some(UsageRecord { doc_id: key.clone(), model_id, usage }),
            _ => None,
        };
        Ok((e.record, usage))
    })
}

pub fn extract(ctx: &mut Context<'_>, factory: &AgentFactory<'_>) -> Result<(), CliError> {
    let manifest = ctx.manifest()?;
    let layout = ctx.layout();
    let docs = manifest.documents();
    let mut failures = Vec::new();
    for selector in ctx.config.extractors.clone() {
        let agent = factory.build(&selector)?;
        let name = agent.name();
        let results = run_extraction(&layout, &docs, agent.as_ref(), ctx.mode_for(&selector));
        let mut usage = Vec::new();
        let mut ok = 0;
        for ((id, kind), r) in docs.iter().zip(results) {
            match r {
                Ok((record, u)) => {
                    write_text(&layout.extraction(&name, id, *kind), &record.to_json_pretty())?;
                    usage.extend(u);
                    ok += 1;
                }
                Err((key, e)) => {
                    log::error!("{name} {key}: {e}");
                    failures.push((format!("{name} {key}"), e));
                }
            }
        }
        write_json(&layout.usage(&name), &usage)?;
        ctx.say(format!("{name}: extracted {ok} of {} documents", docs.len()))?;
    }
    summarize_failures("extract", &failures).map_or(Ok(()), Err)
}

fn load_records(layout: &CorpusLayout, agent: &str, docs: &[(String, DocKind)]) -> Result<Vec<ExtractionRecord>, CliError> {
    let mut missing = Vec::new();
    let mut records = Vec::with_capacity(docs.len());
    for (id, kind) in docs {
        let path = layout.extraction(agent, id, *kind);
        match read_json::<ExtractionRecord>(&path) {
            Ok(r) => records.push(r),
            Err(audit_core::corpus::CorpusError::Missing(_)) => missing.push(doc_key(id, *kind)),
            Err(e) => return Err(e.into()),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(5).map(String::as_str).collect();
        return Err(CliError::new(
            ErrorClass::Filesystem,
            format!(
                "{} extraction record(s) for {agent} are missing ({}{}); run `audit extract --agent {agent}` first",
                missing.len(),
                shown.join(", "),
                if missing.len() > shown.len() { ", ..." } else { "" }
            ),
        ));
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub agent_a: String,
    pub agent_b: Option<String>,
    pub documents: usize,
    pub verified: usize,
    /// `<id>.<kind>: field, field` for every conflicted document.
    pub conflicted: Vec<String>,
    pub pairs: usize,
    /// `<id>: field, field` for every pair whose shared fields disagree.
    pub mismatched_pairs: Vec<String>,
}

pub fn verify(ctx: &mut Context<'_>, factory: &AgentFactory<'_>) -> Result<VerifySummary, CliError> {
    let manifest = ctx.manifest()?;
    let layout = ctx.layout();
    let docs = manifest.documents();
    let selector_a = ctx.config.extractors[0].clone();
    let agent_a = factory.build(&selector_a)?;
    let name_a = agent_a.name();
    let records_a = load_records(&layout, &name_a, &docs)?;

    let mut summary = VerifySummary {
        agent_a: name_a.clone(),
        agent_b: None,
        documents: docs.len(),
        verified: 0,
        conflicted: Vec::new(),
        pairs: manifest.pairs.len(),
        mismatched_pairs: Vec::new(),
    };

    if ctx.config.dual_agent {
        let selector_b = ctx.config.second_agent.clone().unwrap_or_else(|| selector_a.clone());
        let agent_b = factory.build(&selector_b)?;
        let name_b = agent_b.name();
        let tie = ctx.config.tie_break.as_deref().map(|s| factory.build(s)).transpose()?;
        let out_dir = layout.verify_dir().join(format!("{}__{}", agent_slug(&name_a), agent_slug(&name_b)));

        let second = run_extraction(&layout, &docs, agent_b.as_ref(), ctx.mode_for(&selector_b));
        let mut usage = Vec::new();
        let mut failures = Vec::new();
        let mut outcomes = Vec::new();
        for (((id, kind), ra), rb) in docs.iter().zip(&records_a).zip(second) {
            match rb {
                Ok((rb, u)) => {
                    usage.extend(u.map(|u| UsageRecord { doc_id: format!("{} (verify)", u.doc_id), ..u }));
                    outcomes.push(((id.clone(), *kind), VerificationOutcome::from_records(&name_a, ra, &name_b, &rb, *kind)));
                }
                Err(f) => failures.push(f),
            }
        }

        if let Some(third) = &tie {
            let conflicted: Vec<(String, DocKind)> = outcomes
                .iter()
                .filter(|(_, o)| o.status == VerificationStatus::Conflicted)
                .map(|(d, _)| d.clone())
                .collect();
            let mode = ctx.mode_for(ctx.config.tie_break.as_deref().unwrap_or("oracle"));
            let readings = run_extraction(&layout, &conflicted, third.as_ref(), mode);
            for (doc, r) in conflicted.iter().zip(readings) {
                match r {
                    Ok((rc, u)) => {
                        usage.extend(u.map(|u| UsageRecord { doc_id: format!("{} (tie-break)", u.doc_id), ..u }));
                        let o = outcomes.iter_mut().find(|(d, _)| d == doc).expect("conflicted doc present");
                        o.1.attach_tie_break(&third.name(), &rc);
                    }
                    Err(f) => failures.push(f),
                }
            }
        }

        for ((id, kind), o) in &outcomes {
            write_json(&out_dir.join(format!("{id}.{kind}.json")), o)?;
            if o.status == VerificationStatus::Verified {
                summary.verified += 1;
            } else {
                let fields: Vec<&str> = o.conflicts().iter().map(|f| f.as_str()).collect();
                summary.conflicted.push(format!("{}: {}", doc_key(id, *kind), fields.join(", ")));
            }
        }
        if !usage.is_empty() {
            write_json(&layout.usage(&format!("verify-{name_b}")), &usage)?;
        }
        summary.agent_b = Some(name_b);
        if let Some(e) = summarize_failures("verify", &failures) {
            return Err(e);
        }
    }

    let pair_dir = layout.verify_dir().join("pairs").join(agent_slug(&name_a));
    for (i, entry) in manifest.pairs.iter().enumerate() {
        let v = cross_check_pair(&records_a[2 * i], &records_a[2 * i + 1]);
        write_json(&pair_dir.join(format!("{}.json", entry.id)), &v)?;
        if v.status != VerificationStatus::Verified {
            let fields: Vec<&str> = v
                .shared_field_results
                .iter()
                .filter(|(_, r)| **r != audit_core::agents::SharedFieldResult::Match)
                .map(|(f, _)| f.as_str())
                .collect();
            summary.mismatched_pairs.push(format!("{}: {}", entry.id, fields.join(", ")));
        }
    }

    let stem = match &summary.agent_b {
        Some(b) => format!("{}__{}", agent_slug(&name_a), agent_slug(b)),
        None => agent_slug(&name_a),
    };
    write_json(&layout.report(&format!("verification.{stem}"), "json"), &summary)?;

    if let Some(b) = &summary.agent_b {
        ctx.say(format!("{name_a} vs {b}: {} of {} documents verified", summary.verified, summary.documents))?;
        for c in summary.conflicted.clone() {
            ctx.say(format!("  conflicted {c}"))?;
        }
    }
    ctx.say(format!(
        "cross-check ({name_a}): {} of {} pairs match on name and address",
        summary.pairs - summary.mismatched_pairs.len(),
        summary.pairs
    ))?;
    for m in summary.mismatched_pairs.clone() {
        ctx.say(format!("  mismatched {m}"))?;
    }
    Ok(summary)
}

fn write_reports(
    ctx: &mut Context<'_>,
    stem: &str,
    render: impl Fn(ReportFormat) -> String,
) -> Result<(), CliError> {
    let layout = ctx.layout();
    for f in FORMATS {
        write_text(&layout.report(stem, f.extension()), &render(f))?;
    }
    let shown = render(ctx.format);
    write!(ctx.out, "{shown}").map_err(|e| CliError::new(ErrorClass::Filesystem, format!("stdout: {e}")))
}

pub fn evaluate(ctx: &mut Context<'_>, factory: &AgentFactory<'_>) -> Result<AccuracyTable, CliError> {
    let manifest = ctx.manifest()?;
    let layout = ctx.layout();
    let docs = manifest.documents();
    let mut scored = Vec::new();
    for selector in ctx.config.extractors.clone() {
        check_selector(&selector)?;
        let name = factory.build(&selector)?.name();
        let records = load_records(&layout, &name, &docs)?;
        for ((id, kind), record) in docs.iter().zip(&records) {
            let labels = load_labels(&layout, id)?;
            let report = evaluate_record(record, &labels, *kind);
            write_text(&layout.eval(&name, id, *kind), &report.to_json_pretty())?;
            scored.push(ScoredDocument { model: name.clone(), doc_id: id.clone(), kind: *kind, report });
        }
    }
    let table = aggregate(&scored).map_err(|e| CliError::new(ErrorClass::Other, e.to_string()))?;
    write_reports(ctx, "accuracy", |f| emit_report(&table, f))?;
    Ok(table)
}

fn load_usage(dir: &Path) -> Result<Vec<UsageRecord>, CliError> {
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::new(ErrorClass::Filesystem, format!("{}: {e}", dir.display()))),
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_json::<Vec<UsageRecord>>(&p)?);
    }
    Ok(all)
}

pub fn cost(ctx: &mut Context<'_>) -> Result<audit_core::cost::CostReport, CliError> {
    let layout = ctx.layout();
    ctx.manifest()?;
    let table = match &ctx.config.pricing_path {
        Some(p) => PricingTable::load(p)?,
        None => PricingTable::default(),
    };
    let usage = load_usage(&layout.root.join("usage"))?;
    let report = corpus_cost(&usage, &table)?;
    write_reports(ctx, "cost", |f| emit_cost_report(&report, f))?;
    Ok(report)
}

pub fn run_all(ctx: &mut Context<'_>, factory: &AgentFactory<'_>) -> Result<(), CliError> {
    generate(ctx)?;
    extract(ctx, factory)?;
    verify(ctx, factory)?;
    evaluate(ctx, factory)?;
    cost(ctx)?;
    Ok(())
}
