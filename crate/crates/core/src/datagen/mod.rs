//! Seeded generation of labeled, internally consistent document pairs.
//!
//! Every pair draws from its own ChaCha stream derived from `(seed, pair index)`,
//! so parallel and sequential generation produce the same corpus. Profiles are
//! drawn first, in order, so name uniqueness can be enforced against the
//! running history.

mod consistency;
pub mod llm;
mod words;

use chrono::{Duration, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use consistency::{check_consistency, Violation, ViolationKind};

use crate::domain::{
    AccountHolder, AccountType, BankStatement, DateRange, DocumentPair, EmploymentStatus, LoanApplication, LoanForm,
    LoanPurpose, MaritalStatus, Money, PersonProfile, RatePercent, Transaction,
};
use crate::par::{self, Parallelism};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("cannot draw {requested} unique names from a pool of {capacity}")]
    NamePoolExhausted { requested: usize, capacity: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub seed: u64,
    pub n_pairs: usize,
    /// Inclusive bounds on transactions per statement.
    pub tx_count_range: (u32, u32),
    pub opening_balance_range: (Money, Money),
    /// Inclusive bounds on a single transaction's amount.
    pub amount_magnitude_range: (Money, Money),
    /// Inclusive bounds on the requested loan, drawn in $500 steps.
    pub loan_amount_range: (Money, Money),
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 7,
            n_pairs: 49,
            tx_count_range: (4, 12),
            opening_balance_range: (Money::from_dollars(500), Money::from_dollars(250_000)),
            amount_magnitude_range: (Money::from_dollars(5), Money::from_dollars(5_000)),
            loan_amount_range: (Money::from_dollars(5_000), Money::from_dollars(60_000)),
        }
    }
}

impl GenParams {
    pub fn with_pairs(seed: u64, n_pairs: usize) -> Self {
        GenParams { seed, n_pairs, ..GenParams::default() }
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: &str| Err(DatagenError::InvalidParams(m.to_string()));
        if self.n_pairs == 0 {
            return bad("n_pairs must be at least 1");
        }
        if self.tx_count_range.0 > self.tx_count_range.1 {
            return bad("tx_count_range is empty");
        }
        let (lo, hi) = self.opening_balance_range;
        if lo > hi || lo < Money::ZERO {
            return bad("opening_balance_range must be a non-empty, non-negative range");
        }
        let (lo, hi) = self.amount_magnitude_range;
        if lo > hi || lo <= Money::ZERO {
            return bad("amount_magnitude_range must be a non-empty, positive range");
        }
        let (lo, hi) = self.loan_amount_range;
        if lo > hi || lo <= Money::ZERO {
            return bad("loan_amount_range must be a non-empty, positive range");
        }
        Ok(())
    }
}

/// Identities already issued in a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationHistory {
    prior_profiles: Vec<(String, String)>,
}

impl GenerationHistory {
    pub fn record(&mut self, name: impl Into<String>, account_number: impl Into<String>) {
        self.prior_profiles.push((name.into(), account_number.into()));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.prior_profiles
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.prior_profiles.iter().any(|(n, _)| n == name)
    }

    pub fn contains_account(&self, account: &str) -> bool {
        self.prior_profiles.iter().any(|(_, a)| a == account)
    }

    pub fn len(&self) -> usize {
        self.prior_profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior_profiles.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Profile = 0,
    Documents = 1,
    AccountRetry = 2,
}

/// The rng for one (pair, purpose) combination.
fn stream_rng(seed: u64, index: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64) << 2) | stream as u64);
    rng
}

pub fn name_pool_capacity() -> usize {
    words::FIRST_NAMES.len() * words::LAST_NAMES.len()
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, list: &'a [&'a str]) -> &'a str {
    list.choose(rng).copied().unwrap_or_default()
}

fn random_money<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (Money, Money)) -> Money {
    Money::from_cents(rng.random_range(lo.cents()..=hi.cents()))
}

fn digits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.random_range(0..10u8))).collect()
}

/// Draws a plausible borrower from fixed word lists.
pub fn generate_profile<R: Rng + ?Sized>(rng: &mut R) -> PersonProfile {
    let first = pick(rng, words::FIRST_NAMES);
    let last = pick(rng, words::LAST_NAMES);

    let mut line1 = format!(
        "{} {} {}",
        rng.random_range(10..10_000),
        pick(rng, words::STREETS),
        pick(rng, words::STREET_SUFFIXES)
    );
    if rng.random_bool(0.35) {
        line1.push_str(&format!(", {} {}", pick(rng, words::UNIT_PREFIXES), rng.random_range(1..500)));
    }
    let (city, state) = *words::CITIES.choose(rng).expect("city list is non-empty");
    let line2 = format!("{city}, {state} {}", digits(rng, 5));

    let dob = NaiveDate::from_ymd_opt(1950, 1, 1).expect("valid date")
        + Duration::days(rng.random_range(0..(50 * 365)));
    let annual = rng.random_range(25..=250) * 1_000;

    PersonProfile {
        first_name: first.to_string(),
        last_name: last.to_string(),
        ssn: format!("{}-{}-{}", digits(rng, 3), digits(rng, 2), digits(rng, 4)),
        dob,
        email: format!("{}.{}{}@example.com", first.to_lowercase(), last.to_lowercase(), rng.random_range(1..100)),
        phone: format!("555-{}", digits(rng, 4)),
        address_line1: line1,
        address_line2: line2,
        marital_status: *MaritalStatus::ALL.choose(rng).expect("non-empty"),
        employment_status: *EmploymentStatus::ALL.choose(rng).expect("non-empty"),
        employer_name: pick(rng, words::EMPLOYERS).to_string(),
        annual_income: Money::from_dollars(annual),
        other_income: Money::from_dollars(rng.random_range(0..=20) * 500),
        monthly_expenses: Money::from_dollars(rng.random_range(8..=60) * 100),
    }
}

/// Draws profiles until one has a name not in `history`.
pub fn generate_unique_profile<R: Rng + ?Sized>(rng: &mut R, history: &GenerationHistory) -> PersonProfile {
    loop {
        let p = generate_profile(rng);
        if !history.contains_name(&p.full_name()) {
            return p;
        }
    }
}

/// One ledger line before running balances are computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub date: NaiveDate,
    pub description: String,
    pub credit: Option<Money>,
    pub debit: Option<Money>,
}

/// Assembles a statement from its entries, computing running balances,
/// totals, the closing balance and the declared count.
pub fn build_statement(
    account_number: String,
    statement_date: NaiveDate,
    period: DateRange,
    holder: AccountHolder,
    account_type: AccountType,
    opening_balance: Money,
    entries: Vec<LedgerEntry>,
) -> BankStatement {
    let mut balance = opening_balance;
    let mut total_credit = Money::ZERO;
    let mut total_debit = Money::ZERO;
    let transactions: Vec<Transaction> = entries
        .into_iter()
        .map(|e| {
            let credit = e.credit.unwrap_or_default();
            let debit = e.debit.map(Money::abs).unwrap_or_default();
            total_credit += credit;
            total_debit += debit;
            balance = balance + credit - debit;
            Transaction {
                date: e.date,
                description: e.description,
                credit: e.credit,
                debit: e.debit.map(Money::abs),
                balance,
            }
        })
        .collect();

    BankStatement {
        account_number,
        statement_date,
        period,
        holder,
        opening_balance,
        total_credit,
        total_debit,
        closing_balance: opening_balance + total_credit - total_debit,
        account_type,
        declared_transactions: transactions.len() as u32,
        transactions,
    }
}

fn month_period<R: Rng + ?Sized>(rng: &mut R) -> DateRange {
    let year = rng.random_range(2023..=2024);
    let month = rng.random_range(1..=12u32);
    let start = NaiveDate::from_ymd_opt(year, month, 1).expect("first of month");
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("first of next month");
    DateRange::new(start, next.pred_opt().expect("valid")).expect("start precedes end")
}

pub fn random_account_number<R: Rng + ?Sized>(rng: &mut R) -> String {
    format!("{}-{}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 3))
}

/// A monthly statement whose ledger is built forward from the opening balance.
pub fn generate_bank_statement<R: Rng + ?Sized>(profile: &PersonProfile, rng: &mut R, params: &GenParams) -> BankStatement {
    let period = month_period(rng);
    let statement_date = period.end() + Duration::days(rng.random_range(1..=5));
    let account_number = random_account_number(rng);
    let account_type = *AccountType::ALL.choose(rng).expect("non-empty");
    let opening = random_money(rng, params.opening_balance_range);

    let n = rng.random_range(params.tx_count_range.0..=params.tx_count_range.1);
    let mut dates: Vec<NaiveDate> = (0..n)
        .map(|_| period.start() + Duration::days(rng.random_range(0..period.days())))
        .collect();
    dates.sort();

    let mut balance = opening;
    let entries = dates
        .into_iter()
        .map(|date| {
            let amount = random_money(rng, params.amount_magnitude_range);
            // Debits never overdraw the account.
            let is_credit = rng.random_bool(0.5) || amount > balance;
            if is_credit {
                balance += amount;
                LedgerEntry { date, description: pick(rng, words::CREDIT_DESCRIPTIONS).into(), credit: Some(amount), debit: None }
            } else {
                balance -= amount;
                LedgerEntry { date, description: pick(rng, words::DEBIT_DESCRIPTIONS).into(), credit: None, debit: Some(amount) }
            }
        })
        .collect();

    build_statement(account_number, statement_date, period, profile.holder(), account_type, opening, entries)
}

/// A loan application whose identity fields are copied from `profile`.
pub fn generate_loan_application<R: Rng + ?Sized>(
    profile: &PersonProfile,
    rng: &mut R,
    params: &GenParams,
) -> LoanApplication {
    let (lo, hi) = params.loan_amount_range;
    let steps_lo = (lo.cents() + 49_999) / 50_000;
    let steps_hi = (hi.cents() / 50_000).max(steps_lo);
    let amount = Money::from_cents(rng.random_range(steps_lo..=steps_hi).max(1) * 50_000);

    LoanApplication {
        form: LoanForm::default(),
        applicant: profile.applicant(),
        amount,
        purpose: *LoanPurpose::ALL.choose(rng).expect("non-empty"),
        term_years: *[3u32, 5, 7, 10, 15, 20, 30].choose(rng).expect("non-empty"),
        interest_rate: RatePercent::from_hundredths(rng.random_range(10..=48) * 25),
    }
}

pub fn pair_id(index: usize, n_pairs: usize) -> String {
    let width = n_pairs.to_string().len().max(3);
    format!("pair_{:0width$}", index + 1)
}

pub fn generate_corpus(params: &GenParams) -> Result<Vec<DocumentPair>, DatagenError> {
    generate_corpus_with(params, Parallelism::default())
}

pub fn generate_corpus_with(params: &GenParams, mode: Parallelism) -> Result<Vec<DocumentPair>, DatagenError> {
    params.validate()?;
    let capacity = name_pool_capacity();
    // Rejection sampling slows sharply as the pool fills.
    if params.n_pairs > capacity / 2 {
        return Err(DatagenError::NamePoolExhausted { requested: params.n_pairs, capacity: capacity / 2 });
    }

    let mut history = GenerationHistory::default();
    let mut profiles = Vec::with_capacity(params.n_pairs);
    for i in 0..params.n_pairs {
        let mut rng = stream_rng(params.seed, i, Stream::Profile);
        let p = generate_unique_profile(&mut rng, &history);
        history.record(p.full_name(), "");
        profiles.push(p);
    }

    let mut pairs = par::map_indices(profiles.len(), mode, |i| {
        let p = &profiles[i];
        let mut rng = stream_rng(params.seed, i, Stream::Documents);
        let bank = generate_bank_statement(p, &mut rng, params);
        let loan = generate_loan_application(p, &mut rng, params);
        DocumentPair::new(pair_id(i, params.n_pairs), bank, loan)
    });

    let mut accounts = GenerationHistory::default();
    for (i, pair) in pairs.iter_mut().enumerate() {
        let mut retry: Option<ChaCha8Rng> = None;
        while accounts.contains_account(&pair.bank.account_number) {
            let rng = retry.get_or_insert_with(|| stream_rng(params.seed, i, Stream::AccountRetry));
            pair.bank.account_number = random_account_number(rng);
        }
        accounts.record(pair.labels.name.clone(), pair.bank.account_number.clone());
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn profile_is_deterministic_per_seed() {
        assert_eq!(generate_profile(&mut rng(42)), generate_profile(&mut rng(42)));
    }

    #[test]
    fn successive_profiles_differ() {
        let mut r = rng(42);
        let a = generate_profile(&mut r);
        let b = generate_profile(&mut r);
        assert_ne!((a.full_name(), a.ssn), (b.full_name(), b.ssn));
    }

    #[test]
    fn profile_has_two_address_lines() {
        let p = generate_profile(&mut rng(3));
        assert!(p.validate().is_empty());
        assert!(!p.address_line1.contains('\n') && !p.address_line2.contains('\n'));
        assert_eq!(p.joined_address(), format!("{}, {}", p.address_line1, p.address_line2));
    }

    #[test]
    fn generated_statement_is_consistent() {
        let params = GenParams::default();
        let mut r = rng(9);
        for _ in 0..50 {
            let p = generate_profile(&mut r);
            let s = generate_bank_statement(&p, &mut r, &params);
            assert_eq!(check_consistency(&s), vec![]);
            assert_eq!(s.holder.name, p.full_name());
        }
    }

    #[test]
    fn sample_totals_close_at_sample_balance() {
        let d = |day| NaiveDate::from_ymd_opt(2024, 2, day).unwrap();
        let s = build_statement(
            "123-456-789".into(),
            NaiveDate::from_ymd_opt(2024, 3, 1).unwrap(),
            DateRange::new(d(1), d(29)).unwrap(),
            AccountHolder { name: "John Doe".into(), address_line1: "2450 Courage St, STE 108".into(), address_line2: "Brownsville, TX 78521".into() },
            AccountType::Savings,
            Money::from_dollars(175_800),
            vec![
                LedgerEntry { date: d(5), description: "Wire Transfer In".into(), credit: Some(Money::from_dollars(510_000)), debit: None },
                LedgerEntry { date: d(9), description: "Rent Payment".into(), credit: None, debit: Some(Money::from_dollars(94_000)) },
            ],
        );
        assert_eq!(s.closing_balance, Money::from_dollars(591_800));
        assert_eq!(s.total_credit, Money::from_dollars(510_000));
        assert_eq!(s.total_debit, Money::from_dollars(94_000));
        assert!(check_consistency(&s).is_empty());
    }

    #[test]
    fn empty_ledger_closes_at_opening() {
        let params = GenParams { tx_count_range: (0, 0), ..GenParams::default() };
        let p = generate_profile(&mut rng(1));
        let s = generate_bank_statement(&p, &mut rng(2), &params);
        assert!(s.transactions.is_empty());
        assert_eq!(s.closing_balance, s.opening_balance);
        assert_eq!(s.total_credit, Money::ZERO);
        assert_eq!(s.total_debit, Money::ZERO);
        assert!(check_consistency(&s).is_empty());
    }

    #[test]
    fn closing_perturbation_is_one_violation() {
        let p = generate_profile(&mut rng(5));
        let mut s = generate_bank_statement(&p, &mut rng(6), &GenParams::default());
        s.closing_balance += Money::from_cents(1);
        let v = check_consistency(&s);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].field, "Closing_Balance");
    }

    #[test]
    fn out_of_period_dates_are_flagged() {
        let p = generate_profile(&mut rng(5));
        let s = generate_bank_statement(&p, &mut rng(11), &GenParams { tx_count_range: (6, 6), ..GenParams::default() });
        // Brute force: shift each transaction to every day from 40 days before the
        // period to 40 days after, and compare the checker against direct containment.
        for i in 0..s.transactions.len() {
            for offset in -40..(s.period.days() + 40) {
                let mut m = s.clone();
                m.transactions[i].date = s.period.start() + Duration::days(offset);
                let outside = m.transactions[i].date < s.period.start() || m.transactions[i].date > s.period.end();
                let flagged = check_consistency(&m)
                    .iter()
                    .any(|v| v.kind == ViolationKind::DateOutsidePeriod && v.field == format!("transactions[{i}].Date"));
                assert_eq!(flagged, outside);
            }
        }
    }

    #[test]
    fn loan_copies_identity() {
        let p = generate_profile(&mut rng(8));
        let loan = generate_loan_application(&p, &mut rng(8), &GenParams::default());
        assert_eq!(loan.applicant.full_name(), p.full_name());
        assert_eq!(loan.applicant.address, p.joined_address());
        assert!(LoanPurpose::ALL.contains(&loan.purpose));
        assert!(loan.validate().is_empty());
        assert!(loan.amount.cents() % 50_000 == 0);
        assert_eq!(loan, generate_loan_application(&p, &mut rng(8), &GenParams::default()));
    }

    #[test]
    fn corpus_of_49() {
        let pairs = generate_corpus(&GenParams::with_pairs(7, 49)).unwrap();
        assert_eq!(pairs.len(), 49);
        let mut names: Vec<_> = pairs.iter().map(|p| p.labels.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 49);
        for p in &pairs {
            assert!(p.shared_field_mismatches().is_empty());
            assert!(check_consistency(&p.bank).is_empty());
        }
        assert_eq!(pairs[0].id, "pair_001");
    }

    #[test]
    fn single_pair_corpus() {
        let pairs = generate_corpus(&GenParams::with_pairs(1, 1)).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(check_consistency(&pairs[0].bank).is_empty());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let params = GenParams::with_pairs(13, 30);
        let a = generate_corpus_with(&params, Parallelism::Sequential).unwrap();
        let b = generate_corpus_with(&params, Parallelism::Parallel { threads: 4 }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_corpus(&GenParams::with_pairs(1, 0)).is_err());
        let p = GenParams { tx_count_range: (5, 2), ..GenParams::default() };
        assert!(matches!(p.validate(), Err(DatagenError::InvalidParams(_))));
        assert!(matches!(
            generate_corpus(&GenParams::with_pairs(1, name_pool_capacity())),
            Err(DatagenError::NamePoolExhausted { .. })
        ));
    }
}
