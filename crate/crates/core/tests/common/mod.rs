#![allow(dead_code)]

use audit_core::agents::parse_json_lenient;
use audit_core::domain::{BankStatement, DocumentPair, LoanApplication};

pub const BANK_JSON: &str = include_str!("../fixtures/sample_bank.json");
pub const LOAN_JSON: &str = include_str!("../fixtures/sample_loan.json");

pub fn sample_bank() -> BankStatement {
    serde_json::from_value(parse_json_lenient(BANK_JSON).unwrap()).unwrap()
}

pub fn sample_loan() -> LoanApplication {
    serde_json::from_value(parse_json_lenient(LOAN_JSON).unwrap()).unwrap()
}

pub fn sample_pair() -> DocumentPair {
    DocumentPair::new("sample", sample_bank(), sample_loan())
}

pub fn fold(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
