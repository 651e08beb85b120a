use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use super::ParseError;

/// A USD amount in integer cents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_cents(cents: i64) -> Self {
        Money(cents)
    }

    pub const fn from_dollars(dollars: i64) -> Self {
        Money(dollars * 100)
    }

    pub const fn cents(self) -> i64 {
        self.0
    }

    pub fn abs(self) -> Self {
        Money(self.0.abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// True when the amount has no cents component.
    pub fn is_whole_dollars(self) -> bool {
        self.0 % 100 == 0
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_money(*self, false))
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl std::iter::Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, |acc, m| acc + m)
    }
}

/// Parses a money rendering such as `175,800.00`, `$1,116.51` or `-$5.00`.
///
/// The literal `-` (an empty ledger cell) and blank input parse to `None`.
/// Thousands separators must be well placed; at most two decimals are accepted.
pub fn parse_money(text: &str) -> Result<Option<Money>, ParseError> {
    let s = text.trim();
    if s.is_empty() || s == "-" {
        return Ok(None);
    }
    let bad = || ParseError::InvalidMoney(text.to_string());

    let mut rest = s;
    let mut negative = false;
    if let Some(r) = rest.strip_prefix('-') {
        negative = true;
        rest = r;
    }
    if let Some(r) = rest.strip_prefix('$') {
        rest = r;
    }
    if !negative {
        if let Some(r) = rest.strip_prefix('-') {
            negative = true;
            rest = r;
        }
    }

    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (rest, None),
    };
    if int_part.is_empty() {
        return Err(bad());
    }

    let digits: String = if int_part.contains(',') {
        let groups: Vec<&str> = int_part.split(',').collect();
        let first_ok = (1..=3).contains(&groups[0].len());
        let rest_ok = groups[1..].iter().all(|g| g.len() == 3);
        if !first_ok || !rest_ok {
            return Err(bad());
        }
        groups.concat()
    } else {
        int_part.to_string()
    };
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }

    let frac_cents = match frac_part {
        None => 0,
        Some(f) if (1..=2).contains(&f.len()) && f.bytes().all(|b| b.is_ascii_digit()) => {
            let v: i64 = f.parse().map_err(|_| bad())?;
            if f.len() == 1 {
                v * 10
            } else {
                v
            }
        }
        Some(_) => return Err(bad()),
    };

    let dollars: i64 = digits.parse().map_err(|_| bad())?;
    let cents = dollars
        .checked_mul(100)
        .and_then(|c| c.checked_add(frac_cents))
        .ok_or_else(bad)?;
    Ok(Some(Money(if negative { -cents } else { cents })))
}

/// Renders with thousands separators and two decimals; `-$5.00` style when
/// `with_symbol` is set.
pub fn format_money(m: Money, with_symbol: bool) -> String {
    let abs = m.0.unsigned_abs();
    let dollars = (abs / 100).to_string();
    let cents = abs % 100;

    let mut grouped = String::with_capacity(dollars.len() + dollars.len() / 3);
    for (i, ch) in dollars.chars().enumerate() {
        if i > 0 && (dollars.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }

    let mut out = String::new();
    if m.0 < 0 {
        out.push('-');
    }
    if with_symbol {
        out.push('$');
    }
    out.push_str(&grouped);
    out.push('.');
    out.push_str(&format!("{cents:02}"));
    out
}

/// Serde adapters for the different money renderings in the bank and loan JSON.
pub mod serde_money {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::Value;

    use super::{format_money, parse_money, Money};

    fn from_value<E: serde::de::Error>(v: &Value) -> Result<Option<Money>, E> {
        match v {
            Value::Null => Ok(None),
            Value::String(s) => parse_money(s).map_err(E::custom),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    i.checked_mul(100)
                        .map(|c| Some(Money::from_cents(c)))
                        .ok_or_else(|| E::custom(format!("money out of range: {n}")))
                } else {
                    let f = n.as_f64().unwrap_or(f64::NAN);
                    if !f.is_finite() {
                        return Err(E::custom(format!("invalid money: {n}")));
                    }
                    Ok(Some(Money::from_cents((f * 100.0).round() as i64)))
                }
            }
            other => Err(E::custom(format!("invalid money: {other}"))),
        }
    }

    fn required<'de, D: Deserializer<'de>>(d: D) -> Result<Money, D::Error> {
        let v = Value::deserialize(d)?;
        from_value::<D::Error>(&v)?.ok_or_else(|| D::Error::custom("missing money value"))
    }

    /// `"175,800.00"`
    pub mod plain {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Money, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&format_money(*m, false))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Money, D::Error> {
            required(d)
        }
    }

    /// `"$1,116.51"`
    pub mod symbol {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Money, s: S) -> Result<S::Ok, S::Error> {
            s.serialize_str(&format_money(*m, true))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Money, D::Error> {
            required(d)
        }
    }

    /// Credit cell: `"$50.00"` or `"-"`.
    pub mod credit {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Money>, s: S) -> Result<S::Ok, S::Error> {
            match m {
                Some(m) => s.serialize_str(&format_money(*m, true)),
                None => s.serialize_str("-"),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Money>, D::Error> {
            let v = Value::deserialize(d)?;
            from_value::<D::Error>(&v)
        }
    }

    /// Debit cell: stored non-negative, rendered `"-$5.00"`, or `"-"` when absent.
    pub mod debit {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<Money>, s: S) -> Result<S::Ok, S::Error> {
            match m {
                Some(m) => s.serialize_str(&format_money(-m.abs(), true)),
                None => s.serialize_str("-"),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Money>, D::Error> {
            let v = Value::deserialize(d)?;
            Ok(from_value::<D::Error>(&v)?.map(Money::abs))
        }
    }

    /// JSON number of dollars (`25000`), as in the loan application data.
    pub mod number {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Money, s: S) -> Result<S::Ok, S::Error> {
            if m.is_whole_dollars() {
                s.serialize_i64(m.cents() / 100)
            } else {
                s.serialize_f64(m.cents() as f64 / 100.0)
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Money, D::Error> {
            required(d)
        }
    }
}

/// Plain form, `"175,800.00"`; numbers are accepted on input.
impl serde::Serialize for Money {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_money::plain::serialize(self, s)
    }
}

impl<'de> serde::Deserialize<'de> for Money {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_money::plain::deserialize(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_sample_renderings() {
        assert_eq!(parse_money("175,800.00").unwrap(), Some(Money::from_cents(17_580_000)));
        assert_eq!(parse_money("-$5.00").unwrap(), Some(Money::from_cents(-500)));
        assert_eq!(parse_money("$1,116.51").unwrap(), Some(Money::from_cents(111_651)));
        assert_eq!(parse_money("-").unwrap(), None);
        assert_eq!(parse_money("").unwrap(), None);
        assert_eq!(parse_money("0.00").unwrap(), Some(Money::ZERO));
    }

    #[test]
    fn accepts_whole_dollars_and_one_decimal() {
        assert_eq!(parse_money("25000").unwrap(), Some(Money::from_dollars(25_000)));
        assert_eq!(parse_money("$25,000").unwrap(), Some(Money::from_dollars(25_000)));
        assert_eq!(parse_money("5.5").unwrap(), Some(Money::from_cents(550)));
        assert_eq!(parse_money("$-5.00").unwrap(), Some(Money::from_cents(-500)));
    }

    #[test]
    fn rejects_malformed_numbers() {
        for bad in ["abc", "1,00.00", "12,3456.00", "1.234", "$", ".50", "1.2.3", "--5", "1,000,00"] {
            let err = parse_money(bad).unwrap_err();
            assert!(err.to_string().contains(bad), "{err} should name {bad}");
        }
    }

    #[test]
    fn formats() {
        assert_eq!(format_money(Money::from_cents(17_580_000), false), "175,800.00");
        assert_eq!(format_money(Money::ZERO, false), "0.00");
        assert_eq!(format_money(Money::from_cents(-500), true), "-$5.00");
        assert_eq!(format_money(Money::from_cents(99_999), true), "$999.99");
        assert_eq!(format_money(Money::from_cents(100_000), false), "1,000.00");
        assert_eq!(format_money(Money::from_cents(i64::MIN + 1), false), "-92,233,720,368,547,758.07");
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(cents in -(1i64 << 53)..(1i64 << 53), sym in any::<bool>()) {
            let m = Money::from_cents(cents);
            prop_assert_eq!(parse_money(&format_money(m, sym)).unwrap(), Some(m));
        }
    }
}
