//! Scoring extraction records against labels and building accuracy tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::agents::{chat_complete, extract_json_fence, usage_or_estimate, AgentConfig, AgentError, ExtractionRecord, Transport};
use crate::cost::TokenUsage;
use crate::domain::{values_match, DocKind, FieldName, GroundTruthLabels};
use crate::prompts;

/// Per-document result in the evaluator's output schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub correctly_predicted_items: Vec<String>,
    pub incorrectly_predicted_items: Vec<String>,
    pub correctly_predicted: u32,
    pub incorrectly_predicted: u32,
    pub accuracy: f64,
}

impl EvaluationReport {
    fn from_items(correct: Vec<String>, incorrect: Vec<String>) -> Self {
        let c = correct.len() as u32;
        let i = incorrect.len() as u32;
        let accuracy = if c + i == 0 { 0.0 } else { f64::from(c) / f64::from(c + i) };
        EvaluationReport {
            correctly_predicted_items: correct,
            incorrectly_predicted_items: incorrect,
            correctly_predicted: c,
            incorrectly_predicted: i,
            accuracy,
        }
    }

    pub fn is_correct(&self, field: FieldName) -> bool {
        self.correctly_predicted_items.iter().any(|f| f == field.as_str())
    }

    /// Checks counts against item lists and accuracy against counts.
    pub fn check_arithmetic(&self) -> Result<(), String> {
        let c = self.correctly_predicted_items.len() as u32;
        let i = self.incorrectly_predicted_items.len() as u32;
        if self.correctly_predicted != c {
            return Err(format!("correctly_predicted is {} but {} items are listed", self.correctly_predicted, c));
        }
        if self.incorrectly_predicted != i {
            return Err(format!("incorrectly_predicted is {} but {} items are listed", self.incorrectly_predicted, i));
        }
        if c + i == 0 {
            return Err("no items were scored".into());
        }
        let expected = f64::from(c) / f64::from(c + i);
        if (self.accuracy - expected).abs() > 0.005 {
            return Err(format!("accuracy {} does not equal {c}/{}", self.accuracy, c + i));
        }
        Ok(())
    }

    /// Reads a report from model output, accepting counts and accuracy as
    /// numbers or strings and accuracy as a fraction or percentage.
    pub fn from_json_lenient(value: &Value) -> Result<Self, String> {
        let obj = value.as_object().ok_or("report is not a JSON object")?;
        let items = |key: &str| -> Result<Vec<String>, String> {
            match obj.get(key) {
                None | Some(Value::Null) => Ok(Vec::new()),
                Some(Value::Array(a)) => Ok(a
                    .iter()
                    .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
                    .map(|s| s.trim().to_ascii_lowercase().replace([' ', '-'], "_"))
                    .collect()),
                Some(other) => Err(format!("{key} is not a list: {other}")),
            }
        };
        let number = |key: &str| -> Result<f64, String> {
            let v = obj.get(key).ok_or_else(|| format!("missing {key}"))?;
            let parsed = match v {
                Value::Number(n) => n.as_f64(),
                Value::String(s) => {
                    let t = s.trim();
                    match t.strip_suffix('%') {
                        Some(p) => p.trim().parse::<f64>().ok().map(|x| x / 100.0),
                        None => t.parse().ok(),
                    }
                }
                _ => None,
            };
            parsed.filter(|x| x.is_finite() && *x >= 0.0).ok_or_else(|| format!("{key} is not a number: {v}"))
        };
        let count = |key: &str| -> Result<u32, String> {
            let x = number(key)?;
            if x.fract() != 0.0 || x > f64::from(u32::MAX) {
                return Err(format!("{key} is not a whole count: {x}"));
            }
            Ok(x as u32)
        };
        let mut accuracy = number("accuracy")?;
        if accuracy > 1.0 && accuracy <= 100.0 {
            accuracy /= 100.0;
        }
        Ok(EvaluationReport {
            correctly_predicted_items: items("correctly_predicted_items")?,
            incorrectly_predicted_items: items("incorrectly_predicted_items")?,
            correctly_predicted: count("correctly_predicted")?,
            incorrectly_predicted: count("incorrectly_predicted")?,
            accuracy,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Deterministic scoring. Each field the document carries is correct when
/// the prediction matches it after normalization and incorrect otherwise,
/// including when the prediction omits it. A valued prediction for a field
/// the document does not carry is incorrect.
pub fn evaluate_record(prediction: &ExtractionRecord, truth: &GroundTruthLabels, kind: DocKind) -> EvaluationReport {
    let mut correct = Vec::new();
    let mut incorrect = Vec::new();
    for &field in FieldName::ALL {
        let predicted = prediction.valid(field);
        match truth.value(field, kind) {
            Some(t) => {
                if predicted.is_some_and(|p| values_match(field, p, &t)) {
                    correct.push(field.as_str().to_string());
                } else {
                    incorrect.push(field.as_str().to_string());
                }
            }
            None if predicted.is_some() => incorrect.push(field.as_str().to_string()),
            None => {}
        }
    }
    EvaluationReport::from_items(correct, incorrect)
}

/// The truth file sent to the evaluator: the labels applicable to `kind`.
pub fn truth_json(truth: &GroundTruthLabels, kind: DocKind) -> String {
    let map: serde_json::Map<String, Value> = FieldName::applicable(kind)
        .iter()
        .filter_map(|f| truth.value(*f, kind).map(|v| (f.as_str().to_string(), Value::String(v))))
        .collect();
    serde_json::to_string(&Value::Object(map)).expect("map serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmEvaluation {
    pub report: EvaluationReport,
    pub usage: TokenUsage,
}

/// Asks a chat model to score `prediction`. Replies whose counts, lists and
/// accuracy disagree are retried up to `config.max_retries` times.
pub fn llm_evaluate(
    prediction: &ExtractionRecord,
    truth: &GroundTruthLabels,
    kind: DocKind,
    config: &AgentConfig,
    transport: &dyn Transport,
) -> Result<LlmEvaluation, AgentError> {
    let prediction_json = serde_json::to_string(prediction).expect("record serializes");
    let messages = prompts::EVALUATION.render(&[("prediction", &prediction_json), ("true", &truth_json(truth, kind))])?;
    let mut usage: Option<TokenUsage> = None;
    let mut last = String::new();
    for attempt in 0..=config.max_retries {
        let response = chat_complete(&messages, config, transport)?;
        let this = usage_or_estimate(&messages, &response.content, response.usage);
        usage = Some(usage.map_or(this, |u| u.combine(this)));
        let checked = extract_json_fence(&response.content)
            .map_err(|e| e.to_string())
            .and_then(|v| EvaluationReport::from_json_lenient(&v))
            .and_then(|r| r.check_arithmetic().map(|_| r));
        match checked {
            Ok(report) => return Ok(LlmEvaluation { report, usage: usage.expect("set above") }),
            Err(problem) => {
                log::warn!("{}: evaluation attempt {} rejected: {problem}", config.model_id, attempt + 1);
                last = problem;
            }
        }
    }
    Err(AgentError::RetriesExhausted { attempts: config.max_retries + 1, last })
}

/// Rounds half away from zero to two decimals.
pub fn round_half_up_2(x: f64) -> f64 {
    ((x * 100.0) + 0.5 + 1e-9).floor() / 100.0
}

/// Rounded mean of per-field accuracies.
pub fn overall_accuracy(cells: &[f64]) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    round_half_up_2(cells.iter().sum::<f64>() / cells.len() as f64)
}

/// Field order of the published accuracy table for each document kind.
pub fn table_fields(kind: DocKind) -> &'static [FieldName] {
    match kind {
        DocKind::Bank => &[
            FieldName::OpeningBalance,
            FieldName::ClosingBalance,
            FieldName::Name,
            FieldName::PeriodCovered,
            FieldName::Address,
        ],
        DocKind::Loan => &[FieldName::Address, FieldName::LoanAmount, FieldName::Name],
    }
}

fn metric_label(field: FieldName, kind: DocKind) -> &'static str {
    match (field, kind) {
        (FieldName::OpeningBalance, _) => "Opening Balance",
        (FieldName::ClosingBalance, _) => "Closing Balance",
        (FieldName::PeriodCovered, _) => "Period Covered",
        (FieldName::LoanAmount, _) => "Loan Amount",
        (FieldName::Name, DocKind::Bank) => "Name",
        (FieldName::Name, DocKind::Loan) => "Name (Loan)",
        (FieldName::Address, DocKind::Bank) => "Address (Bank)",
        (FieldName::Address, DocKind::Loan) => "Address (Loan)",
    }
}

fn overall_label(kind: DocKind) -> &'static str {
    match kind {
        DocKind::Bank => "Bank Statement Overall Accuracy",
        DocKind::Loan => "Loan Statement Overall Accuracy",
    }
}

/// One scored document of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDocument {
    pub model: String,
    pub doc_id: String,
    pub kind: DocKind,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAccuracy {
    pub field: FieldName,
    pub accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correct: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub total: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindAccuracy {
    pub fields: Vec<FieldAccuracy>,
    pub overall: f64,
}

impl KindAccuracy {
    /// Builds a column from already computed per-field accuracies given in
    /// table order.
    pub fn from_cells(kind: DocKind, cells: &[f64]) -> Result<Self, AggregateError> {
        let order = table_fields(kind);
        if cells.len() != order.len() {
            return Err(AggregateError::CellCount { kind, expected: order.len(), actual: cells.len() });
        }
        if let Some(bad) = cells.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(AggregateError::CellOutOfRange(*bad));
        }
        Ok(KindAccuracy {
            fields: order
                .iter()
                .zip(cells)
                .map(|(f, a)| FieldAccuracy { field: *f, accuracy: *a, correct: None, total: None })
                .collect(),
            overall: overall_accuracy(cells),
        })
    }

    pub fn get(&self, field: FieldName) -> Option<f64> {
        self.fields.iter().find(|f| f.field == field).map(|f| f.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAccuracy {
    pub model: String,
    pub bank: Option<KindAccuracy>,
    pub loan: Option<KindAccuracy>,
}

impl ModelAccuracy {
    pub fn kind(&self, kind: DocKind) -> Option<&KindAccuracy> {
        match kind {
            DocKind::Bank => self.bank.as_ref(),
            DocKind::Loan => self.loan.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub models: Vec<ModelAccuracy>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    #[error("no scored documents")]
    Empty,
    #[error("{kind} column needs {expected} cells, got {actual}")]
    CellCount { kind: DocKind, expected: usize, actual: usize },
    #[error("accuracy {0} is outside [0, 1]")]
    CellOutOfRange(f64),
}

fn kind_accuracy(docs: &[&ScoredDocument], kind: DocKind) -> Option<KindAccuracy> {
    let of_kind: Vec<_> = docs.iter().filter(|d| d.kind == kind).collect();
    if of_kind.is_empty() {
        return None;
    }
    let total = of_kind.len() as u32;
    let fields: Vec<FieldAccuracy> = table_fields(kind)
        .iter()
        .map(|&f| {
            let correct = of_kind.iter().filter(|d| d.report.is_correct(f)).count() as u32;
            FieldAccuracy { field: f, accuracy: f64::from(correct) / f64::from(total), correct: Some(correct), total: Some(total) }
        })
        .collect();
    let cells: Vec<f64> = fields.iter().map(|f| f.accuracy).collect();
    Some(KindAccuracy { overall: overall_accuracy(&cells), fields })
}

/// Per-model, per-field accuracy across documents. Models keep the order
/// in which they first appear.
pub fn aggregate(docs: &[ScoredDocument]) -> Result<AccuracyTable, AggregateError> {
    if docs.is_empty() {
        return Err(AggregateError::Empty);
    }
    let mut names: Vec<&str> = Vec::new();
    for d in docs {
        if !names.contains(&d.model.as_str()) {
            names.push(&d.model);
        }
    }
    let models = names
        .into_iter()
        .map(|name| {
            let mine: Vec<&ScoredDocument> = docs.iter().filter(|d| d.model == name).collect();
            ModelAccuracy {
                model: name.to_string(),
                bank: kind_accuracy(&mine, DocKind::Bank),
                loan: kind_accuracy(&mine, DocKind::Loan),
            }
        })
        .collect();
    Ok(AccuracyTable { models })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReportFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected md, csv or json)")),
        }
    }
}

fn rows(table: &AccuracyTable) -> Vec<(&'static str, Vec<Option<f64>>)> {
    let mut out = Vec::new();
    for kind in [DocKind::Bank, DocKind::Loan] {
        out.push((overall_label(kind), table.models.iter().map(|m| m.kind(kind).map(|k| k.overall)).collect()));
        for &f in table_fields(kind) {
            out.push((metric_label(f, kind), table.models.iter().map(|m| m.kind(kind).and_then(|k| k.get(f))).collect()));
        }
    }
    out
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}", round_half_up_2(x)))
}

/// Serializes the table with metrics as rows and models as columns.
pub fn emit_report(table: &AccuracyTable, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(table).expect("table serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from("metric");
            for m in &table.models {
                s.push(',');
                s.push_str(&m.model);
            }
            s.push('\n');
            for (label, values) in rows(table) {
                s.push_str(label);
                for v in values {
                    s.push(',');
                    s.push_str(&cell(v));
                }
                s.push('\n');
            }
            s
        }
        ReportFormat::Markdown => {
            let mut s = String::from("| Metric |");
            for m in &table.models {
                s.push_str(&format!(" {} |", m.model));
            }
            s.push_str("\n|---|");
            s.push_str(&"---:|".repeat(table.models.len()));
            s.push('\n');
            for (label, values) in rows(table) {
                s.push_str(&format!("| {label} |"));
                for v in values {
                    s.push_str(&format!(" {} |", cell(v)));
                }
                s.push('\n');
            }
            s
        }
    }
}
