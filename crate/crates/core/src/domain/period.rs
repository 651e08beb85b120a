use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ParseError;

/// An inclusive calendar date range, rendered `2024-02-01 to 2024-02-29`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateRange {
    start: NaiveDate,
    end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, ParseError> {
        if start > end {
            return Err(ParseError::InvertedPeriod { start, end });
        }
        Ok(DateRange { start, end })
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.end
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }

    /// Number of days covered, counting both ends.
    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} to {}", self.start.format("%Y-%m-%d"), self.end.format("%Y-%m-%d"))
    }
}

pub(crate) fn parse_date(text: &str) -> Result<NaiveDate, ParseError> {
    let t = text.trim();
    // %Y alone would accept 5-digit years and unpadded fields.
    let shaped = t.len() == 10
        && t.bytes().enumerate().all(|(i, b)| if i == 4 || i == 7 { b == b'-' } else { b.is_ascii_digit() });
    if !shaped {
        return Err(ParseError::InvalidDate(text.to_string()));
    }
    NaiveDate::parse_from_str(t, "%Y-%m-%d").map_err(|_| ParseError::InvalidDate(text.to_string()))
}

/// Parses `YYYY-MM-DD to YYYY-MM-DD`.
pub fn parse_period(text: &str) -> Result<DateRange, ParseError> {
    let (a, b) = text
        .trim()
        .split_once(" to ")
        .ok_or_else(|| ParseError::InvalidPeriod(text.to_string()))?;
    DateRange::new(parse_date(a)?, parse_date(b)?)
}

impl Serialize for DateRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DateRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_period(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn parses_sample_period() {
        let p = parse_period("2024-02-01 to 2024-02-29").unwrap();
        assert_eq!(p.start(), date(2024, 2, 1));
        assert_eq!(p.end(), date(2024, 2, 29));
        assert_eq!(p.days(), 29);
        assert_eq!(p.to_string(), "2024-02-01 to 2024-02-29");
    }

    #[test]
    fn single_day_range() {
        let p = parse_period("2024-03-01 to 2024-03-01").unwrap();
        assert_eq!(p.start(), p.end());
        assert_eq!(p.days(), 1);
    }

    #[test]
    fn rejects_inverted_and_malformed() {
        assert!(matches!(
            parse_period("2024-02-29 to 2024-02-01"),
            Err(ParseError::InvertedPeriod { .. })
        ));
        assert!(matches!(parse_period("2023-02-29 to 2023-03-01"), Err(ParseError::InvalidDate(_))));
        assert!(matches!(parse_period("2024-2-1 to 2024-02-29"), Err(ParseError::InvalidDate(_))));
        assert!(matches!(parse_period("2024-02-01 - 2024-02-29"), Err(ParseError::InvalidPeriod(_))));
    }
}
