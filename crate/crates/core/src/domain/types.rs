use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::money::serde_money;
use super::{format_money, DateRange, Money, ParseError};

macro_rules! text_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

text_enum!(MaritalStatus {
    Single => "Single",
    Married => "Married",
    Divorced => "Divorced",
    Widowed => "Widowed",
});

text_enum!(EmploymentStatus {
    Employed => "Employed",
    Unemployed => "Unemployed",
    SelfEmployed => "Self-Employed",
    Retired => "Retired",
});

text_enum!(AccountType {
    Savings => "Savings",
    Checking => "Checking",
});

text_enum!(LoanPurpose {
    HomePurchase => "Home Purchase",
    HomeRenovation => "Home Renovation",
    DebtConsolidation => "Debt Consolidation",
    Education => "Education",
    Other => "Other",
});

text_enum!(
    /// Which of the two source documents a value belongs to.
    DocKind {
        Bank => "bank",
        Loan => "loan",
    }
);

text_enum!(
    /// The six extraction targets, in extraction-schema order.
    FieldName {
        Name => "name",
        PeriodCovered => "period_covered",
        Address => "address",
        OpeningBalance => "opening_balance",
        ClosingBalance => "closing_balance",
        LoanAmount => "loan_amount",
    }
);

impl FromStr for DocKind {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ParseError::UnknownVariant(s.to_string()))
    }
}

impl FromStr for FieldName {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FieldName::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ParseError::UnknownVariant(s.to_string()))
    }
}

impl FieldName {
    /// Fields that a document of `kind` carries a true value for.
    pub fn applicable(kind: DocKind) -> &'static [FieldName] {
        match kind {
            DocKind::Bank => &[
                FieldName::Name,
                FieldName::PeriodCovered,
                FieldName::Address,
                FieldName::OpeningBalance,
                FieldName::ClosingBalance,
            ],
            DocKind::Loan => &[FieldName::Name, FieldName::Address, FieldName::LoanAmount],
        }
    }

    pub fn applies_to(self, kind: DocKind) -> bool {
        FieldName::applicable(kind).contains(&self)
    }
}

/// Loan interest rate in hundredths of a percent; `550` renders as `"5.5"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatePercent(u32);

impl RatePercent {
    pub const fn from_hundredths(h: u32) -> Self {
        RatePercent(h)
    }

    pub const fn hundredths(self) -> u32 {
        self.0
    }
}

impl fmt::Display for RatePercent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / 100;
        let frac = self.0 % 100;
        if frac % 10 == 0 {
            write!(f, "{whole}.{}", frac / 10)
        } else {
            write!(f, "{whole}.{frac:02}")
        }
    }
}

impl FromStr for RatePercent {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_end_matches('%').trim();
        let bad = || ParseError::InvalidRate(s.to_string());
        let (w, f) = t.split_once('.').unwrap_or((t, ""));
        if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) || f.len() > 2 || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: u32 = w.parse().map_err(|_| bad())?;
        let frac: u32 = match f.len() {
            0 => 0,
            1 => f.parse::<u32>().map_err(|_| bad())? * 10,
            _ => f.parse().map_err(|_| bad())?,
        };
        whole.checked_mul(100).and_then(|v| v.checked_add(frac)).map(RatePercent).ok_or_else(bad)
    }
}

impl Serialize for RatePercent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RatePercent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("invalid interest rate: {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A synthetic borrower. Bank and loan documents are both derived from one profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonProfile {
    pub first_name: String,
    pub last_name: String,
    pub ssn: String,
    pub dob: NaiveDate,
    pub email: String,
    pub phone: String,
    pub address_line1: String,
    pub address_line2: String,
    pub marital_status: MaritalStatus,
    pub employment_status: EmploymentStatus,
    pub employer_name: String,
    #[serde(with = "serde_money::number")]
    pub annual_income: Money,
    #[serde(with = "serde_money::number")]
    pub other_income: Money,
    #[serde(with = "serde_money::number")]
    pub monthly_expenses: Money,
}

impl PersonProfile {
    pub fn full_name(&self) -> String {
        format!("{} {}", self.first_name, self.last_name)
    }

    pub fn joined_address(&self) -> String {
        join_address(&self.address_line1, &self.address_line2)
    }

    pub fn holder(&self) -> AccountHolder {
        AccountHolder {
            name: self.full_name(),
            address_line1: self.address_line1.clone(),
            address_line2: self.address_line2.clone(),
        }
    }

    pub fn applicant(&self) -> Applicant {
        Applicant {
            first_name: self.first_name.clone(),
            last_name: self.last_name.clone(),
            ssn: self.ssn.clone(),
            dob: self.dob,
            email: self.email.clone(),
            phone: self.phone.clone(),
            address: self.joined_address(),
            marital_status: self.marital_status,
            employment_status: self.employment_status,
            employer_name: self.employer_name.clone(),
            annual_income: self.annual_income,
            other_income: self.other_income,
            monthly_expenses: self.monthly_expenses,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (field, v) in [
            ("first_name", &self.first_name),
            ("last_name", &self.last_name),
            ("address_line1", &self.address_line1),
            ("address_line2", &self.address_line2),
        ] {
            if v.trim().is_empty() {
                problems.push(format!("{field} is empty"));
            }
        }
        problems
    }
}

pub(crate) fn join_address(line1: &str, line2: &str) -> String {
    format!("{line1}, {line2}")
}

/// The identity block printed on a bank statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountHolder {
    pub name: String,
    pub address_line1: String,
    pub address_line2: String,
}

impl AccountHolder {
    pub fn joined_address(&self) -> String {
        join_address(&self.address_line1, &self.address_line2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    #[serde(rename = "Date")]
    pub date: NaiveDate,
    #[serde(rename = "Description")]
    pub description: String,
    #[serde(rename = "Credit", with = "serde_money::credit", default)]
    pub credit: Option<Money>,
    /// Non-negative; rendered with a leading minus.
    #[serde(rename = "Debit", with = "serde_money::debit", default)]
    pub debit: Option<Money>,
    #[serde(rename = "Balance", with = "serde_money::symbol")]
    pub balance: Money,
}

impl Transaction {
    pub fn credit_or_zero(&self) -> Money {
        self.credit.unwrap_or(Money::ZERO)
    }

    pub fn debit_or_zero(&self) -> Money {
        self.debit.unwrap_or(Money::ZERO)
    }

    /// The literal cell text for the credit column.
    pub fn credit_cell(&self) -> String {
        self.credit.map_or_else(|| "-".to_string(), |m| format_money(m, true))
    }

    pub fn debit_cell(&self) -> String {
        self.debit.map_or_else(|| "-".to_string(), |m| format_money(-m.abs(), true))
    }
}

mod count_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(n)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => s.trim().parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => n
                .as_u64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| serde::de::Error::custom(format!("invalid count: {n}"))),
            other => Err(serde::de::Error::custom(format!("invalid count: {other}"))),
        }
    }
}

/// A monthly bank statement, serialized with the bank-data key names
/// (`Account_Number`, `Opening_Balance`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankStatement {
    #[serde(rename = "Account_Number")]
    pub account_number: String,
    #[serde(rename = "Statement_Date")]
    pub statement_date: NaiveDate,
    #[serde(rename = "Period_Covered")]
    pub period: DateRange,
    #[serde(flatten)]
    pub holder: AccountHolder,
    #[serde(rename = "Opening_Balance", with = "serde_money::plain")]
    pub opening_balance: Money,
    #[serde(rename = "Total_Credit_Amount", with = "serde_money::plain")]
    pub total_credit: Money,
    #[serde(rename = "Total_Debit_Amount", with = "serde_money::plain")]
    pub total_debit: Money,
    #[serde(rename = "Closing_Balance", with = "serde_money::plain")]
    pub closing_balance: Money,
    #[serde(rename = "Account_Type")]
    pub account_type: AccountType,
    /// The count printed on the statement, which must match `transactions.len()`.
    #[serde(rename = "Number_Transactions", with = "count_text")]
    pub declared_transactions: u32,
    #[serde(default)]
    pub transactions: Vec<Transaction>,
}

/// The applicant block of a loan application form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applicant {
    pub first_name: String,
    pub last_name: String,
    pub ssn: String,
    pub dob: NaiveDate,
    pub email: String,
    pub phone: String,
    /// Single-line address: `line1, line2`.
    pub address: String,
    pub marital_status: MaritalStatus,
    pub employment_status: EmploymentStatus,
    pub employer_name: String,
    #[serde(with = "serde_money::number")]
    pub annual_income: Money,
    #[serde(with = "serde_money::number")]
    pub other_income: Money,
    #[serde(with = "serde_money::number")]
    pub monthly_expenses: Money,
}

impl Applicant {
    pub fn full_name(&self) -> String {
        format!("{} {}", self.first_name, self.last_name)
    }
}

/// Static form metadata printed at the top of the application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoanForm {
    pub title: String,
    pub form_title: String,
    pub form_action: String,
}

impl Default for LoanForm {
    fn default() -> Self {
        LoanForm {
            title: "Loan Application Form".into(),
            form_title: "Please Fill Out the Loan Application".into(),
            form_action: "/submit-application".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoanApplication {
    pub form: LoanForm,
    pub applicant: Applicant,
    pub amount: Money,
    pub purpose: LoanPurpose,
    pub term_years: u32,
    pub interest_rate: RatePercent,
}

impl LoanApplication {
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.amount <= Money::ZERO {
            problems.push(format!("loan amount must be positive, got {}", self.amount));
        }
        if self.term_years == 0 {
            problems.push("loan term must be positive".to_string());
        }
        for (field, v) in [
            ("first_name", &self.applicant.first_name),
            ("last_name", &self.applicant.last_name),
            ("address", &self.applicant.address),
        ] {
            if v.trim().is_empty() {
                problems.push(format!("applicant {field} is empty"));
            }
        }
        problems
    }
}

#[derive(Serialize, Deserialize)]
struct LoanDetailsWire {
    #[serde(with = "serde_money::number")]
    amount: Money,
    purpose: LoanPurpose,
    term: u32,
    interest_rate: RatePercent,
}

#[derive(Serialize, Deserialize)]
struct LoanWire {
    #[serde(flatten)]
    form: LoanForm,
    applicant: Applicant,
    #[serde(default, skip_deserializing)]
    marital_statuses: Vec<MaritalStatus>,
    #[serde(default, skip_deserializing)]
    employment_statuses: Vec<EmploymentStatus>,
    loan_details: LoanDetailsWire,
    #[serde(default, skip_deserializing)]
    loan_purposes: LoanPurposeTable,
}

/// `{"Home Purchase": "Home Purchase", ...}` in declaration order.
#[derive(Default)]
struct LoanPurposeTable;

impl Serialize for LoanPurposeTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(LoanPurpose::ALL.len()))?;
        for p in LoanPurpose::ALL {
            map.serialize_entry(p.as_str(), p.as_str())?;
        }
        map.end()
    }
}

impl Serialize for LoanApplication {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        LoanWire {
            form: self.form.clone(),
            applicant: self.applicant.clone(),
            marital_statuses: MaritalStatus::ALL.to_vec(),
            employment_statuses: EmploymentStatus::ALL.to_vec(),
            loan_details: LoanDetailsWire {
                amount: self.amount,
                purpose: self.purpose,
                term: self.term_years,
                interest_rate: self.interest_rate,
            },
            loan_purposes: LoanPurposeTable,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LoanApplication {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = LoanWire::deserialize(d)?;
        Ok(LoanApplication {
            form: w.form,
            applicant: w.applicant,
            amount: w.loan_details.amount,
            purpose: w.loan_details.purpose,
            term_years: w.loan_details.term,
            interest_rate: w.loan_details.interest_rate,
        })
    }
}

/// Canonical values of the six extraction targets for one document pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthLabels {
    pub name: String,
    pub period_covered: DateRange,
    pub address: String,
    #[serde(with = "serde_money::plain")]
    pub opening_balance: Money,
    #[serde(with = "serde_money::plain")]
    pub closing_balance: Money,
    #[serde(with = "serde_money::plain")]
    pub loan_amount: Money,
}

impl GroundTruthLabels {
    pub fn derive(bank: &BankStatement, loan: &LoanApplication) -> Self {
        GroundTruthLabels {
            name: loan.applicant.full_name(),
            period_covered: bank.period,
            address: bank.holder.joined_address(),
            opening_balance: bank.opening_balance,
            closing_balance: bank.closing_balance,
            loan_amount: loan.amount,
        }
    }

    /// The true value of `field` for a document of `kind`, formatted as the
    /// label file stores it; `None` when that document has no such field.
    pub fn value(&self, field: FieldName, kind: DocKind) -> Option<String> {
        if !field.applies_to(kind) {
            return None;
        }
        Some(match field {
            FieldName::Name => self.name.clone(),
            FieldName::PeriodCovered => self.period_covered.to_string(),
            FieldName::Address => self.address.clone(),
            FieldName::OpeningBalance => format_money(self.opening_balance, false),
            FieldName::ClosingBalance => format_money(self.closing_balance, false),
            FieldName::LoanAmount => format_money(self.loan_amount, false),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentPair {
    pub id: String,
    pub bank: BankStatement,
    pub loan: LoanApplication,
    pub labels: GroundTruthLabels,
}

impl DocumentPair {
    pub fn new(id: impl Into<String>, bank: BankStatement, loan: LoanApplication) -> Self {
        let labels = GroundTruthLabels::derive(&bank, &loan);
        DocumentPair { id: id.into(), bank, loan, labels }
    }

    /// Mismatches between the identity fields both documents carry.
    pub fn shared_field_mismatches(&self) -> Vec<String> {
        let mut out = Vec::new();
        let applicant = &self.loan.applicant;
        if self.bank.holder.name != applicant.full_name() {
            out.push(format!("name: bank {:?} vs loan {:?}", self.bank.holder.name, applicant.full_name()));
        }
        if self.bank.holder.joined_address() != applicant.address {
            out.push(format!(
                "address: bank {:?} vs loan {:?}",
                self.bank.holder.joined_address(),
                applicant.address
            ));
        }
        out
    }
}
