use thiserror::Error;

use super::ExtractionRecord;
use crate::documents::{detect_template, TemplateId};
use crate::domain::{format_money, parse_money, parse_period, DocKind, FieldName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("anchor {0:?} not found in document text")]
    MissingAnchor(String),
    #[error("value {value:?} after anchor {anchor:?} does not parse")]
    BadValue { anchor: String, value: String },
    #[error("text matches a {found} template, not a {expected} one")]
    WrongKind { expected: DocKind, found: DocKind },
}

struct Text<'a> {
    lines: Vec<&'a str>,
}

impl<'a> Text<'a> {
    fn new(text: &'a str) -> Self {
        Text { lines: text.lines().map(str::trim).filter(|l| !l.is_empty()).collect() }
    }

    fn position(&self, anchor: &str, pred: impl Fn(&str) -> bool) -> Result<usize, OracleError> {
        self.lines.iter().position(|l| pred(l)).ok_or_else(|| OracleError::MissingAnchor(anchor.into()))
    }

    /// The remainder of the first line starting with `label`.
    fn after(&self, label: &str) -> Result<&'a str, OracleError> {
        let i = self.position(label, |l| l.starts_with(label))?;
        Ok(self.lines[i][label.len()..].trim())
    }

    /// Second cell of the first `label | value` row.
    fn cell(&self, label: &str) -> Result<&'a str, OracleError> {
        let i = self.position(label, |l| l.split(" | ").next() == Some(label))?;
        self.lines[i].split(" | ").nth(1).map(str::trim).ok_or_else(|| OracleError::MissingAnchor(label.into()))
    }

    /// Lines strictly between the marker and the first line satisfying `stop`.
    fn block_after(&self, marker: &str, stop_anchor: &str, stop: impl Fn(&str) -> bool) -> Result<&[&'a str], OracleError> {
        let start = self.position(marker, |l| l == marker)? + 1;
        let len = self.lines[start..]
            .iter()
            .position(|l| stop(l))
            .ok_or_else(|| OracleError::MissingAnchor(stop_anchor.into()))?;
        if len == 0 {
            return Err(OracleError::MissingAnchor(format!("{marker} holder block")));
        }
        Ok(&self.lines[start..start + len])
    }
}

fn money(anchor: &str, raw: &str) -> Result<String, OracleError> {
    match parse_money(raw) {
        Ok(Some(m)) => Ok(format_money(m, false)),
        _ => Err(OracleError::BadValue { anchor: anchor.into(), value: raw.into() }),
    }
}

fn period(anchor: &str, raw: &str) -> Result<String, OracleError> {
    parse_period(raw).map(|p| p.to_string()).map_err(|_| OracleError::BadValue { anchor: anchor.into(), value: raw.into() })
}

fn holder(record: &mut ExtractionRecord, lines: &[&str]) {
    record.set(FieldName::Name, Some(lines[0].to_string()));
    if lines.len() > 1 {
        record.set(FieldName::Address, Some(lines[1..].join(", ")));
    }
}

/// Rule-based extraction from text read out of this crate's templates.
pub fn oracle_extract(text: &str, kind: DocKind) -> Result<ExtractionRecord, OracleError> {
    let t = Text::new(text);
    let template = match detect_template(text) {
        Some(id) => id,
        None if kind == DocKind::Loan => TemplateId::Loan1,
        None => return Err(OracleError::MissingAnchor("bank statement heading".into())),
    };
    if template.kind() != kind {
        return Err(OracleError::WrongKind { expected: kind, found: template.kind() });
    }
    let mut r = ExtractionRecord::default();
    match template {
        TemplateId::Bank1 => {
            holder(&mut r, t.block_after("Statement of Account", "Account Number", |l| l.contains(" | "))?);
            r.set(FieldName::PeriodCovered, Some(period("Period Covered", t.cell("Period Covered")?)?));
            r.set(FieldName::OpeningBalance, Some(money("Opening Balance", t.cell("Opening Balance")?)?));
            r.set(FieldName::ClosingBalance, Some(money("Closing Balance", t.cell("Closing Balance")?)?));
        }
        TemplateId::Bank2 => {
            r.set(FieldName::Name, Some(t.after("Account Holder:")?.to_string()));
            r.set(FieldName::Address, Some(t.after("Mailing Address:")?.to_string()));
            r.set(FieldName::PeriodCovered, Some(period("Statement Period:", t.after("Statement Period:")?)?));
            r.set(FieldName::OpeningBalance, Some(money("Beginning Balance:", t.after("Beginning Balance:")?)?));
            r.set(FieldName::ClosingBalance, Some(money("Ending Balance:", t.after("Ending Balance:")?)?));
        }
        TemplateId::Bank3 => {
            holder(&mut r, t.block_after("Customer Statement", "Statement Date:", |l| l.starts_with("Statement Date:"))?);
            r.set(FieldName::PeriodCovered, Some(period("For the period", t.after("For the period")?)?));
            const HEADER: &str = "Previous Balance | Credits | Debits | New Balance";
            let i = t.position(HEADER, |l| l == HEADER)?;
            let row = t.lines.get(i + 1).ok_or_else(|| OracleError::MissingAnchor("summary row".into()))?;
            let cells: Vec<&str> = row.split(" | ").collect();
            if cells.len() != 4 {
                return Err(OracleError::BadValue { anchor: HEADER.into(), value: row.to_string() });
            }
            r.set(FieldName::OpeningBalance, Some(money("Previous Balance", cells[0])?));
            r.set(FieldName::ClosingBalance, Some(money("New Balance", cells[3])?));
        }
        TemplateId::Loan1 => {
            r.set(FieldName::Name, Some(t.after("Full Name:")?.to_string()));
            r.set(FieldName::Address, Some(t.after("Address:")?.to_string()));
            r.set(FieldName::LoanAmount, Some(money("Loan Amount:", t.after("Loan Amount:")?)?));
        }
    }
    for f in FieldName::applicable(kind) {
        if r.valid(*f).is_none() {
            return Err(OracleError::MissingAnchor(f.as_str().into()));
        }
    }
    Ok(r)
}
