use std::fmt;

use crate::domain::{format_money, BankStatement, Money};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// `opening + total_credit - total_debit != closing`
    LedgerIdentity,
    CreditTotal,
    DebitTotal,
    RunningBalance,
    EmptyTransaction,
    DateOutsidePeriod,
    StatementDateBeforePeriodEnd,
    TransactionCount,
}

/// One failed statement check, naming the field and expected vs actual values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected {}, got {}", self.field, self.expected, self.actual)
    }
}

fn money_violation(kind: ViolationKind, field: impl Into<String>, expected: Money, actual: Money) -> Violation {
    Violation {
        kind,
        field: field.into(),
        expected: format_money(expected, false),
        actual: format_money(actual, false),
    }
}

/// Checks every ledger and date invariant of a statement. Empty iff the
/// statement is internally consistent.
pub fn check_consistency(s: &BankStatement) -> Vec<Violation> {
    let mut out = Vec::new();

    let expected_closing = s.opening_balance + s.total_credit - s.total_debit;
    if expected_closing != s.closing_balance {
        out.push(money_violation(
            ViolationKind::LedgerIdentity,
            "Closing_Balance",
            expected_closing,
            s.closing_balance,
        ));
    }

    let credits: Money = s.transactions.iter().map(|t| t.credit_or_zero()).sum();
    if credits != s.total_credit {
        out.push(money_violation(ViolationKind::CreditTotal, "Total_Credit_Amount", credits, s.total_credit));
    }
    let debits: Money = s.transactions.iter().map(|t| t.debit_or_zero()).sum();
    if debits != s.total_debit {
        out.push(money_violation(ViolationKind::DebitTotal, "Total_Debit_Amount", debits, s.total_debit));
    }

    let mut prior = s.opening_balance;
    for (i, t) in s.transactions.iter().enumerate() {
        if t.credit.is_none() && t.debit.is_none() {
            out.push(Violation {
                kind: ViolationKind::EmptyTransaction,
                field: format!("transactions[{i}].Credit/Debit"),
                expected: "a credit or a debit".into(),
                actual: "neither".into(),
            });
        }
        let expected = prior + t.credit_or_zero() - t.debit_or_zero();
        if expected != t.balance {
            out.push(money_violation(
                ViolationKind::RunningBalance,
                format!("transactions[{i}].Balance"),
                expected,
                t.balance,
            ));
        }
        if !s.period.contains(t.date) {
            out.push(Violation {
                kind: ViolationKind::DateOutsidePeriod,
                field: format!("transactions[{i}].Date"),
                expected: format!("a date in {}", s.period),
                actual: t.date.to_string(),
            });
        }
        prior = t.balance;
    }

    if s.statement_date < s.period.end() {
        out.push(Violation {
            kind: ViolationKind::StatementDateBeforePeriodEnd,
            field: "Statement_Date".into(),
            expected: format!("on or after {}", s.period.end()),
            actual: s.statement_date.to_string(),
        });
    }

    if s.declared_transactions as usize != s.transactions.len() {
        out.push(Violation {
            kind: ViolationKind::TransactionCount,
            field: "Number_Transactions".into(),
            expected: s.transactions.len().to_string(),
            actual: s.declared_transactions.to_string(),
        });
    }

    out
}
