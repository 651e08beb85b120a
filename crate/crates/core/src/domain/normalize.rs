use super::{format_money, parse_money, parse_period, FieldName};

/// How a field's text is canonicalized before comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Name,
    Address,
    Period,
    Money,
}

impl FieldName {
    pub fn kind(self) -> FieldKind {
        match self {
            FieldName::Name => FieldKind::Name,
            FieldName::Address => FieldKind::Address,
            FieldName::PeriodCovered => FieldKind::Period,
            FieldName::OpeningBalance | FieldName::ClosingBalance | FieldName::LoanAmount => FieldKind::Money,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub text: String,
    /// False when a money or period value did not parse and the folded raw
    /// text was used instead.
    pub canonical: bool,
}

fn fold(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Canonical comparison form of an extracted or true field value.
pub fn normalize_field(kind: FieldKind, raw: &str) -> Normalized {
    match kind {
        FieldKind::Name => Normalized { text: fold(raw), canonical: true },
        FieldKind::Address => {
            let text = raw
                .replace(['\n', '\r'], ",")
                .split(',')
                .map(fold)
                .filter(|p| !p.is_empty())
                .collect::<Vec<_>>()
                .join(", ");
            Normalized { text, canonical: true }
        }
        FieldKind::Period => match parse_period(raw) {
            Ok(p) => Normalized { text: p.to_string(), canonical: true },
            Err(_) => Normalized { text: fold(raw), canonical: false },
        },
        FieldKind::Money => match parse_money(raw) {
            Ok(Some(m)) => Normalized { text: format_money(m, false), canonical: true },
            _ => Normalized { text: fold(raw), canonical: false },
        },
    }
}

/// True when two raw values of `field` agree after normalization.
pub fn values_match(field: FieldName, a: &str, b: &str) -> bool {
    normalize_field(field.kind(), a).text == normalize_field(field.kind(), b).text
}
