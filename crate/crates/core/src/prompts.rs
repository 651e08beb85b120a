//! The generation, extraction and evaluation prompt message pairs.
//!
//! Templates use Python `str.format` syntax: `{name}` is a placeholder and
//! `{{` / `}}` are literal braces.

use thiserror::Error;

use crate::agents::ChatMessage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt placeholder {{{0}}} has no value")]
    MissingValue(String),
    #[error("unbalanced brace at byte {0} of prompt template")]
    UnbalancedBrace(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: &'static str,
    pub system: &'static str,
    pub user: &'static str,
}

pub const BANK_INFO: PromptTemplate = PromptTemplate {
    name: "BANK_INFO",
    system: include_str!("../prompts/bank_info.system.txt"),
    user: include_str!("../prompts/bank_info.user.txt"),
};

pub const LOAN_INFO: PromptTemplate = PromptTemplate {
    name: "LOAN_INFO",
    system: include_str!("../prompts/loan_info.system.txt"),
    user: include_str!("../prompts/loan_info.user.txt"),
};

pub const AUDIT: PromptTemplate = PromptTemplate {
    name: "AUDIT",
    system: include_str!("../prompts/audit.system.txt"),
    user: include_str!("../prompts/audit.user.txt"),
};

pub const EVALUATION: PromptTemplate = PromptTemplate {
    name: "EVALUATION",
    system: include_str!("../prompts/evaluation.system.txt"),
    user: include_str!("../prompts/evaluation.user.txt"),
};

impl PromptTemplate {
    /// Renders the system and user messages with `vars` substituted.
    pub fn render(&self, vars: &[(&str, &str)]) -> Result<Vec<ChatMessage>, PromptError> {
        Ok(vec![
            ChatMessage::system(format_template(self.system, vars)?),
            ChatMessage::user(format_template(self.user, vars)?),
        ])
    }
}

pub fn format_template(template: &str, vars: &[(&str, &str)]) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len());
    let bytes = template.as_bytes();
    let mut i = 0;
    let mut literal_start = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if bytes.get(i + 1) == Some(&b'{') => {
                out.push_str(&template[literal_start..i]);
                out.push('{');
                i += 2;
                literal_start = i;
            }
            b'}' if bytes.get(i + 1) == Some(&b'}') => {
                out.push_str(&template[literal_start..i]);
                out.push('}');
                i += 2;
                literal_start = i;
            }
            b'{' => {
                out.push_str(&template[literal_start..i]);
                let close = template[i..].find('}').map(|off| i + off).ok_or(PromptError::UnbalancedBrace(i))?;
                let key = &template[i + 1..close];
                let value = vars
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| PromptError::MissingValue(key.to_string()))?;
                out.push_str(value);
                i = close + 1;
                literal_start = i;
            }
            b'}' => return Err(PromptError::UnbalancedBrace(i)),
            _ => i += 1,
        }
    }
    out.push_str(&template[literal_start..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn braces_and_placeholders() {
        assert_eq!(format_template("{{a}} {b} }}", &[("b", "x{y}")]).unwrap(), "{a} x{y} }");
        assert_eq!(format_template("{missing}", &[]), Err(PromptError::MissingValue("missing".into())));
        assert!(matches!(format_template("a } b", &[]), Err(PromptError::UnbalancedBrace(2))));
        assert!(matches!(format_template("a { b", &[]), Err(PromptError::UnbalancedBrace(2))));
    }

    #[test]
    fn templates_carry_their_placeholders() {
        assert!(BANK_INFO.user.contains("{history}"));
        assert!(LOAN_INFO.user.contains("{user_information}"));
        assert!(AUDIT.user.contains("{text}"));
        assert!(EVALUATION.user.contains("{prediction}") && EVALUATION.user.contains("{true}"));
        for t in [BANK_INFO, LOAN_INFO, AUDIT, EVALUATION] {
            // System messages have no placeholders, only escaped braces.
            assert!(format_template(t.system, &[]).is_ok(), "{}", t.name);
        }
    }
}
