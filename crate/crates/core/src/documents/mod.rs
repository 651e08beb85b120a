//! Rendering document pairs to markup and reading them back as text.

mod template;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::{format_money, BankStatement, DocKind, DocumentPair, LoanApplication, ParseError};
use template::{Context, Segment};

pub use text::html_to_text;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("unresolved placeholder {{{{{0}}}}}")]
    UnresolvedPlaceholder(String),
    #[error("template {template} renders {expected} documents, not {actual}")]
    KindMismatch { template: TemplateId, expected: DocKind, actual: DocKind },
    #[error("malformed template: {0}")]
    Malformed(String),
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path} is not valid UTF-8")]
    NotUtf8 { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Bank1,
    Bank2,
    Bank3,
    Loan1,
}

impl TemplateId {
    pub const ALL: &'static [TemplateId] = &[TemplateId::Bank1, TemplateId::Bank2, TemplateId::Bank3, TemplateId::Loan1];
    pub const BANK: &'static [TemplateId] = &[TemplateId::Bank1, TemplateId::Bank2, TemplateId::Bank3];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Bank1 => "bank_1",
            TemplateId::Bank2 => "bank_2",
            TemplateId::Bank3 => "bank_3",
            TemplateId::Loan1 => "loan_1",
        }
    }

    pub fn kind(self) -> DocKind {
        match self {
            TemplateId::Loan1 => DocKind::Loan,
            _ => DocKind::Bank,
        }
    }

    /// The bank template used for the pair at `index` (zero-based).
    pub fn for_pair(index: usize) -> TemplateId {
        TemplateId::BANK[index % TemplateId::BANK.len()]
    }

    pub fn template(self) -> &'static Template {
        let all = templates();
        &all[TemplateId::ALL.iter().position(|t| *t == self).expect("listed")]
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| ParseError::UnknownVariant(format!("template {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutTraits {
    /// Name, street and city appear on separate lines.
    pub multi_line_address: bool,
}

#[derive(Debug)]
pub struct Template {
    pub id: TemplateId,
    pub body: &'static str,
    pub layout_traits: LayoutTraits,
    /// A line that only this template's text contains.
    pub marker: &'static str,
    segments: Vec<Segment>,
}

impl Template {
    pub fn kind(&self) -> DocKind {
        self.id.kind()
    }

    pub fn placeholders(&self) -> Vec<String> {
        template::placeholders(&self.segments)
    }
}

fn templates() -> &'static [Template] {
    static ALL: OnceLock<Vec<Template>> = OnceLock::new();
    ALL.get_or_init(|| {
        let make = |id, body: &'static str, multi_line_address, marker| Template {
            id,
            body,
            layout_traits: LayoutTraits { multi_line_address },
            marker,
            segments: template::parse(body).unwrap_or_else(|e| panic!("bundled template {id}: {e}")),
        };
        vec![
            make(TemplateId::Bank1, include_str!("../../templates/bank_1.html"), true, "Statement of Account"),
            make(TemplateId::Bank2, include_str!("../../templates/bank_2.html"), false, "ACCOUNT STATEMENT"),
            make(TemplateId::Bank3, include_str!("../../templates/bank_3.html"), true, "Customer Statement"),
            make(TemplateId::Loan1, include_str!("../../templates/loan_1.html"), false, "Please Fill Out"),
        ]
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub pair_id: String,
    pub kind: DocKind,
    pub template_id: TemplateId,
    pub content: String,
}

impl Document {
    pub fn file_name(&self) -> String {
        format!("{}.{}.html", self.pair_id, self.kind)
    }
}

fn plain(m: crate::domain::Money) -> String {
    format_money(m, false)
}

fn bank_context(b: &BankStatement) -> Context {
    let mut ctx = Context::default();
    let s = &mut ctx.scalars;
    s.insert("Account_Number", b.account_number.clone());
    s.insert("Statement_Date", b.statement_date.to_string());
    s.insert("Period_Covered", b.period.to_string());
    s.insert("name", b.holder.name.clone());
    s.insert("address_line1", b.holder.address_line1.clone());
    s.insert("address_line2", b.holder.address_line2.clone());
    s.insert("Opening_Balance", plain(b.opening_balance));
    s.insert("Total_Credit_Amount", plain(b.total_credit));
    s.insert("Total_Debit_Amount", plain(b.total_debit));
    s.insert("Closing_Balance", plain(b.closing_balance));
    s.insert("Account_Type", b.account_type.to_string());
    s.insert("Number_Transactions", b.declared_transactions.to_string());
    let rows = b
        .transactions
        .iter()
        .map(|t| {
            HashMap::from([
                ("Date", t.date.to_string()),
                ("Description", t.description.clone()),
                ("Credit", t.credit_cell()),
                ("Debit", t.debit_cell()),
                ("Balance", format_money(t.balance, true)),
            ])
        })
        .collect();
    ctx.sections.insert("transactions", rows);
    ctx
}

fn loan_context(l: &LoanApplication) -> Context {
    let mut ctx = Context::default();
    let a = &l.applicant;
    let s = &mut ctx.scalars;
    s.insert("title", l.form.title.clone());
    s.insert("form_title", l.form.form_title.clone());
    s.insert("form_action", l.form.form_action.clone());
    s.insert("first_name", a.first_name.clone());
    s.insert("last_name", a.last_name.clone());
    s.insert("ssn", a.ssn.clone());
    s.insert("dob", a.dob.to_string());
    s.insert("email", a.email.clone());
    s.insert("phone", a.phone.clone());
    s.insert("address", a.address.clone());
    s.insert("marital_status", a.marital_status.to_string());
    s.insert("employment_status", a.employment_status.to_string());
    s.insert("employer_name", a.employer_name.clone());
    s.insert("annual_income", plain(a.annual_income));
    s.insert("other_income", plain(a.other_income));
    s.insert("monthly_expenses", plain(a.monthly_expenses));
    s.insert("amount", plain(l.amount));
    s.insert("purpose", l.purpose.to_string());
    s.insert("term", l.term_years.to_string());
    s.insert("interest_rate", l.interest_rate.to_string());
    ctx
}

pub fn render_bank(pair_id: &str, bank: &BankStatement, template: &Template) -> Result<Document, RenderError> {
    render_with(pair_id, DocKind::Bank, template, &bank_context(bank))
}

pub fn render_loan(pair_id: &str, loan: &LoanApplication, template: &Template) -> Result<Document, RenderError> {
    render_with(pair_id, DocKind::Loan, template, &loan_context(loan))
}

fn render_with(pair_id: &str, kind: DocKind, template: &Template, ctx: &Context) -> Result<Document, RenderError> {
    if template.kind() != kind {
        return Err(RenderError::KindMismatch { template: template.id, expected: template.kind(), actual: kind });
    }
    let mut content = String::with_capacity(template.body.len() * 2);
    template::render(&template.segments, ctx, &mut content)?;
    Ok(Document { pair_id: pair_id.to_string(), kind, template_id: template.id, content })
}

/// Renders one side of `pair` through `template`.
pub fn render(pair: &DocumentPair, kind: DocKind, template: &Template) -> Result<Document, RenderError> {
    match kind {
        DocKind::Bank => render_bank(&pair.id, &pair.bank, template),
        DocKind::Loan => render_loan(&pair.id, &pair.loan, template),
    }
}

/// Plain text of a rendered document.
pub fn read_document(doc: &Document) -> String {
    html_to_text(&doc.content)
}

/// Reads text produced outside this pipeline, e.g. by a PDF converter.
pub fn ingest_external_text(path: impl AsRef<Path>) -> Result<String, IngestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    String::from_utf8(bytes).map_err(|_| IngestError::NotUtf8 { path: path.to_path_buf() })
}

/// The template whose marker line appears in `text`, if any.
pub fn detect_template(text: &str) -> Option<TemplateId> {
    templates()
        .iter()
        .find(|t| text.lines().any(|l| l.trim() == t.marker || (t.id == TemplateId::Loan1 && l.contains(t.marker))))
        .map(|t| t.id)
}
