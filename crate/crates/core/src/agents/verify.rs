use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AgentError, ExtractionRecord, Extractor};
use crate::domain::{normalize_field, values_match, DocKind, FieldName};

#[derive(Debug, Error)]
#[error("agent {agent}: {source}")]
pub struct VerifyError {
    pub agent: String,
    #[source]
    pub source: AgentError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieBreak {
    pub agent: String,
    pub value: Option<String>,
    /// The side whose value the third agent matched, if either.
    pub agrees_with: Option<Side>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FieldVerdict {
    /// Both agents reported the same normalized value, or both reported none.
    Agreed { value: Option<String> },
    Conflict { a: Option<String>, b: Option<String>, tie_break: Option<TieBreak> },
}

impl FieldVerdict {
    pub fn is_conflict(&self) -> bool {
        matches!(self, FieldVerdict::Conflict { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerificationStatus {
    Verified,
    Conflicted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationOutcome {
    pub agent_a: String,
    pub agent_b: String,
    pub per_field: BTreeMap<FieldName, FieldVerdict>,
    pub status: VerificationStatus,
}

impl VerificationOutcome {
    fn from_fields(agent_a: String, agent_b: String, per_field: BTreeMap<FieldName, FieldVerdict>) -> Self {
        let status = if per_field.values().any(FieldVerdict::is_conflict) {
            VerificationStatus::Conflicted
        } else {
            VerificationStatus::Verified
        };
        VerificationOutcome { agent_a, agent_b, per_field, status }
    }

    /// Outcome of comparing two records already extracted from one document.
    pub fn from_records(
        agent_a: &str,
        a: &ExtractionRecord,
        agent_b: &str,
        b: &ExtractionRecord,
        kind: DocKind,
    ) -> Self {
        Self::from_fields(agent_a.to_string(), agent_b.to_string(), compare_records(a, b, kind))
    }

    /// Records a third agent's reading on every conflicted field.
    pub fn attach_tie_break(&mut self, agent: &str, third: &ExtractionRecord) {
        for (field, verdict) in self.per_field.iter_mut() {
            if let FieldVerdict::Conflict { a: va, b: vb, tie_break } = verdict {
                let value = third.valid(*field).map(String::from);
                let same = |side: &Option<String>| match (side, &value) {
                    (Some(s), Some(v)) => values_match(*field, s, v),
                    (None, None) => true,
                    _ => false,
                };
                let agrees_with = if same(va) {
                    Some(Side::A)
                } else if same(vb) {
                    Some(Side::B)
                } else {
                    None
                };
                *tie_break = Some(TieBreak { agent: agent.to_string(), value, agrees_with });
            }
        }
    }

    pub fn conflicts(&self) -> Vec<FieldName> {
        self.per_field.iter().filter(|(_, v)| v.is_conflict()).map(|(f, _)| *f).collect()
    }
}

/// Field-by-field comparison over the fields applicable to `kind`.
pub fn compare_records(a: &ExtractionRecord, b: &ExtractionRecord, kind: DocKind) -> BTreeMap<FieldName, FieldVerdict> {
    FieldName::applicable(kind)
        .iter()
        .map(|&f| {
            let verdict = match (a.valid(f), b.valid(f)) {
                (None, None) => FieldVerdict::Agreed { value: None },
                (Some(x), Some(y)) if values_match(f, x, y) => {
                    FieldVerdict::Agreed { value: Some(normalize_field(f.kind(), x).text) }
                }
                (x, y) => FieldVerdict::Conflict { a: x.map(String::from), b: y.map(String::from), tie_break: None },
            };
            (f, verdict)
        })
        .collect()
}

fn run(agent: &dyn Extractor, text: &str, kind: DocKind) -> Result<ExtractionRecord, VerifyError> {
    agent.extract(text, kind).map(|e| e.record).map_err(|source| VerifyError { agent: agent.name(), source })
}

/// Both agents extract from `text`; any disagreement marks the outcome conflicted.
pub fn dual_agent_verify(
    text: &str,
    kind: DocKind,
    a: &dyn Extractor,
    b: &dyn Extractor,
) -> Result<VerificationOutcome, VerifyError> {
    let ra = run(a, text, kind)?;
    let rb = run(b, text, kind)?;
    Ok(VerificationOutcome::from_records(&a.name(), &ra, &b.name(), &rb, kind))
}

/// As [`dual_agent_verify`], and on conflict a third agent's reading is
/// attached to each conflicted field. The outcome stays conflicted.
pub fn dual_agent_verify_with_tie_break(
    text: &str,
    kind: DocKind,
    a: &dyn Extractor,
    b: &dyn Extractor,
    third: &dyn Extractor,
) -> Result<VerificationOutcome, VerifyError> {
    let mut outcome = dual_agent_verify(text, kind, a, b)?;
    if outcome.status == VerificationStatus::Conflicted {
        let rc = run(third, text, kind)?;
        outcome.attach_tie_break(&third.name(), &rc);
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SharedFieldResult {
    Match,
    Mismatch { bank: Option<String>, loan: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerification {
    pub shared_field_results: BTreeMap<FieldName, SharedFieldResult>,
    pub status: VerificationStatus,
}

/// Compares the identity fields a bank and loan record both carry.
pub fn cross_check_pair(bank: &ExtractionRecord, loan: &ExtractionRecord) -> PairVerification {
    let shared_field_results: BTreeMap<_, _> = [FieldName::Name, FieldName::Address]
        .into_iter()
        .map(|f| {
            let r = match (bank.valid(f), loan.valid(f)) {
                (Some(x), Some(y)) if values_match(f, x, y) => SharedFieldResult::Match,
                (x, y) => SharedFieldResult::Mismatch { bank: x.map(String::from), loan: y.map(String::from) },
            };
            (f, r)
        })
        .collect();
    let status = if shared_field_results.values().all(|r| *r == SharedFieldResult::Match) {
        VerificationStatus::Verified
    } else {
        VerificationStatus::Conflicted
    };
    PairVerification { shared_field_results, status }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Extraction, OracleAgent};

    struct Fixed(&'static str, ExtractionRecord);

    impl Extractor for Fixed {
        fn name(&self) -> String {
            self.0.into()
        }
        fn extract(&self, _: &str, _: DocKind) -> Result<Extraction, AgentError> {
            Ok(Extraction { record: self.1.clone(), usage: None, model_id: None })
        }
    }

    struct Failing;

    impl Extractor for Failing {
        fn name(&self) -> String {
            "broken".into()
        }
        fn extract(&self, _: &str, _: DocKind) -> Result<Extraction, AgentError> {
            Err(AgentError::InvalidInput("nope".into()))
        }
    }

    const LOAN: &str = "Please Fill Out the Loan Application\nFull Name: Jane Doe\nAddress: 123 Elm Street, Yourtown, YS\nLoan Amount: $25,000.00";

    fn loan_record() -> ExtractionRecord {
        ExtractionRecord::default()
            .with(FieldName::Name, "Jane Doe")
            .with(FieldName::Address, "123 Elm Street, Yourtown, YS")
            .with(FieldName::LoanAmount, "25,000.00")
    }

    #[test]
    fn oracle_agrees_with_itself() {
        let o = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &OracleAgent).unwrap();
        assert_eq!(o.status, VerificationStatus::Verified);
        assert_eq!(o.per_field.len(), 3);
        assert!(o.conflicts().is_empty());
    }

    #[test]
    fn truncated_address_conflicts_alone() {
        let b = Fixed("short", loan_record().with(FieldName::Address, "123 Elm Street"));
        let o = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &b).unwrap();
        assert_eq!(o.status, VerificationStatus::Conflicted);
        assert_eq!(o.conflicts(), vec![FieldName::Address]);
    }

    #[test]
    fn normalization_counts_as_agreement() {
        let b = Fixed("sym", loan_record().with(FieldName::LoanAmount, "$25,000.00").with(FieldName::Name, "JANE  DOE"));
        let o = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &b).unwrap();
        assert_eq!(o.status, VerificationStatus::Verified);
        assert_eq!(o.per_field[&FieldName::LoanAmount], FieldVerdict::Agreed { value: Some("25,000.00".into()) });
    }

    #[test]
    fn swapping_agents_swaps_sides() {
        let a = Fixed("a", loan_record());
        let b = Fixed("b", loan_record().with(FieldName::Name, "John Doe"));
        let ab = dual_agent_verify(LOAN, DocKind::Loan, &a, &b).unwrap();
        let ba = dual_agent_verify(LOAN, DocKind::Loan, &b, &a).unwrap();
        for f in FieldName::applicable(DocKind::Loan) {
            match (&ab.per_field[f], &ba.per_field[f]) {
                (FieldVerdict::Agreed { value: x }, FieldVerdict::Agreed { value: y }) => assert_eq!(x, y),
                (FieldVerdict::Conflict { a: a1, b: b1, .. }, FieldVerdict::Conflict { a: a2, b: b2, .. }) => {
                    assert_eq!((a1, b1), (b2, a2))
                }
                other => panic!("asymmetric verdicts {other:?}"),
            }
        }
    }

    #[test]
    fn one_sided_value_conflicts() {
        let mut r = loan_record();
        r.set(FieldName::Name, None);
        let o = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &Fixed("x", r)).unwrap();
        assert_eq!(
            o.per_field[&FieldName::Name],
            FieldVerdict::Conflict { a: Some("Jane Doe".into()), b: None, tie_break: None }
        );
    }

    #[test]
    fn errors_name_the_agent() {
        let e = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &Failing).unwrap_err();
        assert_eq!(e.agent, "broken");
    }

    #[test]
    fn tie_break_records_the_third_reading() {
        let b = Fixed("short", loan_record().with(FieldName::Address, "123 Elm Street"));
        let o = dual_agent_verify_with_tie_break(LOAN, DocKind::Loan, &b, &OracleAgent, &OracleAgent).unwrap();
        assert_eq!(o.status, VerificationStatus::Conflicted);
        match &o.per_field[&FieldName::Address] {
            FieldVerdict::Conflict { tie_break: Some(t), .. } => {
                assert_eq!(t.agrees_with, Some(Side::B));
                assert_eq!(t.agent, "oracle");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cross_check() {
        let bank = ExtractionRecord::default()
            .with(FieldName::Name, "John Doe")
            .with(FieldName::Address, "2450 Courage St, STE 108\nBrownsville, TX 78521");
        let loan = ExtractionRecord::default()
            .with(FieldName::Name, "Jane Doe")
            .with(FieldName::Address, "2450 courage st,  STE 108, Brownsville, TX 78521");
        let v = cross_check_pair(&bank, &loan);
        assert_eq!(v.status, VerificationStatus::Conflicted);
        assert_eq!(v.shared_field_results[&FieldName::Address], SharedFieldResult::Match);
        assert_eq!(
            v.shared_field_results[&FieldName::Name],
            SharedFieldResult::Mismatch { bank: Some("John Doe".into()), loan: Some("Jane Doe".into()) }
        );
        assert_eq!(cross_check_pair(&bank, &bank).status, VerificationStatus::Verified);
        let absent = cross_check_pair(&bank, &ExtractionRecord::default());
        assert_eq!(
            absent.shared_field_results[&FieldName::Name],
            SharedFieldResult::Mismatch { bank: Some("John Doe".into()), loan: None }
        );
    }

    #[test]
    fn outcome_serializes_with_field_keys() {
        let o = dual_agent_verify(LOAN, DocKind::Loan, &OracleAgent, &OracleAgent).unwrap();
        let v = serde_json::to_value(&o).unwrap();
        assert_eq!(v["status"], "verified");
        assert_eq!(v["per_field"]["name"]["verdict"], "agreed");
        assert_eq!(v["per_field"]["name"]["value"], "jane doe");
    }
}
