//! Token accounting and cost estimation from per-million-token prices.
//!
//! Amounts are integer micro-dollars. A component cost is computed exactly
//! as `tokens × price` in pico-dollars and rounded half-up to a micro-dollar
//! once; document totals are the sum of the two rounded components, so
//! every reported figure is an exact integer number of micro-dollars.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::evaluate::ReportFormat;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("no pricing entry for model {0:?}")]
    UnknownModel(String),
    #[error("no pricing entries for models: {}", .0.join(", "))]
    MissingPricing(Vec<String>),
    #[error("invalid price {0:?}")]
    InvalidPrice(String),
    #[error("pricing file {path}: {message}")]
    PricingFile { path: String, message: String },
}

/// A USD amount in integer micro-dollars.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Usd(i64);

impl Usd {
    pub const ZERO: Usd = Usd(0);

    pub const fn from_micros(m: i64) -> Self {
        Usd(m)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    /// Parses `10`, `0.65`, `$1.20` with up to six decimals, exactly.
    pub fn parse(text: &str) -> Result<Usd, CostError> {
        let bad = || CostError::InvalidPrice(text.to_string());
        let t = text.trim().trim_start_matches('$');
        let (w, f) = t.split_once('.').unwrap_or((t, ""));
        if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) || f.len() > 6 || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = w.parse().map_err(|_| bad())?;
        let frac: i64 = if f.is_empty() { 0 } else { format!("{f:0<6}").parse().map_err(|_| bad())? };
        whole.checked_mul(1_000_000).and_then(|v| v.checked_add(frac)).map(Usd).ok_or_else(bad)
    }

    fn from_f64(v: f64) -> Result<Usd, CostError> {
        if !v.is_finite() || v < 0.0 {
            return Err(CostError::InvalidPrice(v.to_string()));
        }
        Ok(Usd((v * 1e6).round() as i64))
    }

    fn as_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

impl std::ops::Add for Usd {
    type Output = Usd;
    fn add(self, rhs: Usd) -> Usd {
        Usd(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Usd {
    fn sum<I: Iterator<Item = Usd>>(iter: I) -> Usd {
        iter.fold(Usd::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Usd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}${}.{:06}", a / 1_000_000, a % 1_000_000)
    }
}

mod usd_number {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Usd, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(v.as_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Usd, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => match n.as_u64() {
                Some(i) => Ok(Usd(i as i64 * 1_000_000)),
                None => Usd::from_f64(n.as_f64().unwrap_or(f64::NAN)).map_err(serde::de::Error::custom),
            },
            serde_json::Value::String(s) => Usd::parse(&s).map_err(serde::de::Error::custom),
            other => Err(serde::de::Error::custom(format!("invalid price: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UsageSource {
    ProviderReported,
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub source: UsageSource,
}

impl TokenUsage {
    pub fn reported(input_tokens: u64, output_tokens: u64) -> Self {
        TokenUsage { input_tokens, output_tokens, source: UsageSource::ProviderReported }
    }

    pub fn estimated(input_tokens: u64, output_tokens: u64) -> Self {
        TokenUsage { input_tokens, output_tokens, source: UsageSource::Estimated }
    }

    /// Sums two usages; the result counts as estimated if either part was.
    pub fn combine(self, other: TokenUsage) -> TokenUsage {
        let source = if self.source == UsageSource::Estimated || other.source == UsageSource::Estimated {
            UsageSource::Estimated
        } else {
            UsageSource::ProviderReported
        };
        TokenUsage {
            input_tokens: self.input_tokens + other.input_tokens,
            output_tokens: self.output_tokens + other.output_tokens,
            source,
        }
    }
}

/// Roughly four characters per token.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PricingEntry {
    pub model_id: String,
    pub provider: String,
    #[serde(with = "usd_number")]
    pub input_price_per_1m: Usd,
    #[serde(with = "usd_number")]
    pub output_price_per_1m: Usd,
}

impl PricingEntry {
    pub fn new(model_id: &str, provider: &str, input: Usd, output: Usd) -> Self {
        PricingEntry { model_id: model_id.into(), provider: provider.into(), input_price_per_1m: input, output_price_per_1m: output }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PricingTable {
    pub entries: Vec<PricingEntry>,
}

impl Default for PricingTable {
    /// Published per-million-token list prices for the four evaluated models.
    fn default() -> Self {
        let usd = Usd::from_micros;
        PricingTable {
            entries: vec![
                PricingEntry::new("gpt4", "Open-AI", usd(10_000_000), usd(30_000_000)),
                PricingEntry::new("llama3_70b", "Replicate", usd(650_000), usd(2_750_000)),
                PricingEntry::new("llama2_70b", "Replicate", usd(650_000), usd(2_750_000)),
                PricingEntry::new("dbrx", "Together.ai", usd(1_200_000), usd(1_200_000)),
            ],
        }
    }
}

impl PricingTable {
    pub fn get(&self, model_id: &str) -> Option<&PricingEntry> {
        self.entries.iter().find(|e| e.model_id == model_id)
    }

    pub fn load(path: &Path) -> Result<PricingTable, CostError> {
        let err = |message: String| CostError::PricingFile { path: path.display().to_string(), message };
        let raw = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let table: PricingTable = serde_json::from_str(&raw).map_err(|e| err(e.to_string()))?;
        for e in &table.entries {
            if e.input_price_per_1m < Usd::ZERO || e.output_price_per_1m < Usd::ZERO {
                return Err(err(format!("negative price for {}", e.model_id)));
            }
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("pricing serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentCost {
    #[serde(with = "usd_number")]
    pub input_cost: Usd,
    #[serde(with = "usd_number")]
    pub output_cost: Usd,
    #[serde(with = "usd_number")]
    pub total_cost: Usd,
}

fn component(tokens: u64, price_per_1m: Usd) -> Usd {
    // tokens × µ$/1M tokens = pico-dollars
    let pico = tokens as u128 * price_per_1m.micros().max(0) as u128;
    Usd(((pico + 500_000) / 1_000_000) as i64)
}

pub fn document_cost(usage: &TokenUsage, pricing: &PricingEntry) -> DocumentCost {
    let input_cost = component(usage.input_tokens, pricing.input_price_per_1m);
    let output_cost = component(usage.output_tokens, pricing.output_price_per_1m);
    DocumentCost { input_cost, output_cost, total_cost: input_cost + output_cost }
}

pub fn price_usage(usage: &TokenUsage, model_id: &str, table: &PricingTable) -> Result<DocumentCost, CostError> {
    let entry = table.get(model_id).ok_or_else(|| CostError::UnknownModel(model_id.to_string()))?;
    Ok(document_cost(usage, entry))
}

/// Token usage of one model call chain for one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageRecord {
    pub doc_id: String,
    pub model_id: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRow {
    pub doc_id: String,
    pub model_id: String,
    pub usage: TokenUsage,
    #[serde(flatten)]
    pub cost: DocumentCost,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub per_document: Vec<CostRow>,
    #[serde(with = "usd_number")]
    pub corpus_total: Usd,
}

pub fn corpus_cost(usages: &[UsageRecord], table: &PricingTable) -> Result<CostReport, CostError> {
    let missing: BTreeSet<&str> =
        usages.iter().map(|u| u.model_id.as_str()).filter(|m| table.get(m).is_none()).collect();
    if !missing.is_empty() {
        return Err(CostError::MissingPricing(missing.into_iter().map(String::from).collect()));
    }
    let mut per_document: Vec<CostRow> = usages
        .iter()
        .map(|u| CostRow {
            doc_id: u.doc_id.clone(),
            model_id: u.model_id.clone(),
            usage: u.usage,
            cost: document_cost(&u.usage, table.get(&u.model_id).expect("checked above")),
        })
        .collect();
    per_document.sort_by(|a, b| a.doc_id.cmp(&b.doc_id).then_with(|| a.model_id.cmp(&b.model_id)));
    let corpus_total = per_document.iter().map(|r| r.cost.total_cost).sum();
    Ok(CostReport { per_document, corpus_total })
}

pub fn emit_cost_report(report: &CostReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from("doc_id,model_id,input_tokens,output_tokens,usage_source,input_cost,output_cost,total_cost\n");
            for r in &report.per_document {
                s.push_str(&format!(
                    "{},{},{},{},{},{:.6},{:.6},{:.6}\n",
                    r.doc_id,
                    r.model_id,
                    r.usage.input_tokens,
                    r.usage.output_tokens,
                    source_label(r.usage.source),
                    r.cost.input_cost.as_f64(),
                    r.cost.output_cost.as_f64(),
                    r.cost.total_cost.as_f64()
                ));
            }
            s.push_str(&format!("TOTAL,,,,,,,{:.6}\n", report.corpus_total.as_f64()));
            s
        }
        ReportFormat::Markdown => {
            let mut s = String::from(
                "| Document | Model | Input tokens | Output tokens | Input cost | Output cost | Total |\n|---|---|---:|---:|---:|---:|---:|\n",
            );
            for r in &report.per_document {
                s.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} |\n",
                    r.doc_id, r.model_id, r.usage.input_tokens, r.usage.output_tokens, r.cost.input_cost, r.cost.output_cost, r.cost.total_cost
                ));
            }
            s.push_str(&format!("\n**Corpus total:** {} over {} documents\n", report.corpus_total, report.per_document.len()));
            s
        }
    }
}

fn source_label(s: UsageSource) -> &'static str {
    match s {
        UsageSource::ProviderReported => "provider_reported",
        UsageSource::Estimated => "estimated",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table() -> PricingTable {
        PricingTable::default()
    }

    #[test]
    fn token_estimates() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("a"), 1);
        assert_eq!(estimate_tokens(&"x".repeat(20_000)), 5_000);
        assert_eq!(estimate_tokens("abcde"), 2);
    }

    #[test]
    fn listed_per_document_costs() {
        let gpt4 = price_usage(&TokenUsage::estimated(5_000, 100), "gpt4", &table()).unwrap();
        assert_eq!(gpt4.input_cost, Usd::from_micros(50_000));
        assert_eq!(gpt4.output_cost, Usd::from_micros(3_000));
        assert_eq!(gpt4.total_cost, Usd::from_micros(53_000));
        let llama = price_usage(&TokenUsage::estimated(5_000, 0), "llama3_70b", &table()).unwrap();
        assert_eq!(llama.total_cost, Usd::from_micros(3_250));
        let dbrx = price_usage(&TokenUsage::estimated(5_000, 0), "dbrx", &table()).unwrap();
        assert_eq!(dbrx.total_cost, Usd::from_micros(6_000));
        assert!(matches!(price_usage(&TokenUsage::estimated(1, 1), "gpt5", &table()), Err(CostError::UnknownModel(_))));
    }

    #[test]
    fn corpus_of_49_gpt4_documents() {
        let usages: Vec<UsageRecord> = (0..49)
            .map(|i| UsageRecord { doc_id: format!("pair_{:03}.bank", i + 1), model_id: "gpt4".into(), usage: TokenUsage::estimated(5_000, 100) })
            .collect();
        let r = corpus_cost(&usages, &table()).unwrap();
        // 49 × (5,000 × $10 + 100 × $30) / 1e6
        assert_eq!(r.corpus_total, Usd::from_micros(49 * (5_000 * 10 + 100 * 30)));
        assert_eq!(r.corpus_total, Usd::from_micros(2_597_000));
        assert_eq!(r.per_document.len(), 49);
    }

    #[test]
    fn empty_corpus_costs_nothing() {
        let r = corpus_cost(&[], &table()).unwrap();
        assert_eq!(r.corpus_total, Usd::ZERO);
    }

    #[test]
    fn missing_models_are_all_listed() {
        let u = |m: &str| UsageRecord { doc_id: "d".into(), model_id: m.into(), usage: TokenUsage::estimated(1, 1) };
        match corpus_cost(&[u("zeta"), u("gpt4"), u("alpha"), u("zeta")], &table()) {
            Err(CostError::MissingPricing(m)) => assert_eq!(m, vec!["alpha".to_string(), "zeta".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixed_models_sum_by_component() {
        let usages = vec![
            UsageRecord { doc_id: "b".into(), model_id: "dbrx".into(), usage: TokenUsage::reported(1_234, 56) },
            UsageRecord { doc_id: "a".into(), model_id: "gpt4".into(), usage: TokenUsage::reported(4_321, 87) },
            UsageRecord { doc_id: "c".into(), model_id: "llama2_70b".into(), usage: TokenUsage::reported(2_000, 90) },
        ];
        let r = corpus_cost(&usages, &table()).unwrap();
        assert_eq!(r.per_document.iter().map(|r| r.doc_id.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
        // Brute force in pico-dollars with explicit rounding of each component.
        let round = |pico: u128| ((pico + 500_000) / 1_000_000) as i64;
        let expected = round(1_234 * 1_200_000) + round(56 * 1_200_000)
            + round(4_321 * 10_000_000) + round(87 * 30_000_000)
            + round(2_000 * 650_000) + round(90 * 2_750_000);
        assert_eq!(r.corpus_total.micros(), expected);
    }

    #[test]
    fn default_table_matches_published_rows() {
        let t = table();
        assert_eq!(t.entries.len(), 4);
        let row = |m: &str| {
            let e = t.get(m).unwrap();
            (e.provider.clone(), e.input_price_per_1m.to_string(), e.output_price_per_1m.to_string())
        };
        assert_eq!(row("gpt4"), ("Open-AI".into(), "$10.000000".into(), "$30.000000".into()));
        assert_eq!(row("llama3_70b"), ("Replicate".into(), "$0.650000".into(), "$2.750000".into()));
        assert_eq!(row("llama2_70b"), ("Replicate".into(), "$0.650000".into(), "$2.750000".into()));
        assert_eq!(row("dbrx"), ("Together.ai".into(), "$1.200000".into(), "$1.200000".into()));
    }

    #[test]
    fn pricing_json_round_trips_with_decimal_prices() {
        let json = table().to_json();
        assert!(json.contains("\"input_price_per_1m\": 0.65"));
        let back: PricingTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, table());
        let s: PricingTable = serde_json::from_str(
            r#"[{"model_id":"m","provider":"p","input_price_per_1m":"$1.25","output_price_per_1m":2}]"#,
        )
        .unwrap();
        assert_eq!(s.entries[0].input_price_per_1m, Usd::from_micros(1_250_000));
        assert_eq!(s.entries[0].output_price_per_1m, Usd::from_micros(2_000_000));
    }

    #[test]
    fn usd_parse() {
        assert_eq!(Usd::parse("0.65").unwrap(), Usd::from_micros(650_000));
        assert_eq!(Usd::parse("$10").unwrap(), Usd::from_micros(10_000_000));
        assert!(Usd::parse("1.0000001").is_err());
        assert!(Usd::parse("-1").is_err());
    }

    proptest! {
        #[test]
        fn cost_is_monotonic_and_zero_at_zero(a in 0u64..10_000_000, b in 0u64..10_000_000, m in 0usize..4) {
            let e = &table().entries[m];
            let zero = document_cost(&TokenUsage::estimated(0, 0), e);
            prop_assert_eq!(zero.total_cost, Usd::ZERO);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(document_cost(&TokenUsage::estimated(lo, 7), e).total_cost <= document_cost(&TokenUsage::estimated(hi, 7), e).total_cost);
            prop_assert!(document_cost(&TokenUsage::estimated(7, lo), e).total_cost <= document_cost(&TokenUsage::estimated(7, hi), e).total_cost);
        }

        #[test]
        fn cost_is_linear_for_whole_thousands(k in 0u64..10_000, m in 0usize..4) {
            // At multiples of 1,000 tokens no rounding occurs for these prices.
            let e = &table().entries[m];
            let one = document_cost(&TokenUsage::estimated(1_000, 1_000), e).total_cost.micros();
            prop_assert_eq!(document_cost(&TokenUsage::estimated(1_000 * k, 1_000 * k), e).total_cost.micros(), one * k as i64);
        }
    }
}
