//! Value types shared by every pipeline stage: money, periods, the bank and
//! loan documents, ground-truth labels, and field normalization.

mod money;
mod normalize;
mod period;
mod types;

use chrono::NaiveDate;
use thiserror::Error;

pub use money::{format_money, parse_money, serde_money, Money};
pub use normalize::{normalize_field, values_match, FieldKind, Normalized};
pub use period::{parse_period, DateRange};
pub use types::{
    AccountHolder, AccountType, Applicant, BankStatement, DocKind, DocumentPair, EmploymentStatus, FieldName,
    GroundTruthLabels, LoanApplication, LoanForm, LoanPurpose, MaritalStatus, PersonProfile, RatePercent,
    Transaction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid money value: {0:?}")]
    InvalidMoney(String),
    #[error("invalid date: {0:?}")]
    InvalidDate(String),
    #[error("invalid period (expected \"YYYY-MM-DD to YYYY-MM-DD\"): {0:?}")]
    InvalidPeriod(String),
    #[error("period start {start} is after end {end}")]
    InvertedPeriod { start: NaiveDate, end: NaiveDate },
    #[error("invalid interest rate: {0:?}")]
    InvalidRate(String),
    #[error("unknown value: {0:?}")]
    UnknownVariant(String),
}
