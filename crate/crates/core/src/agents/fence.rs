use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no parseable JSON in model output: {}", truncate(.raw))]
pub struct FenceError {
    pub raw: String,
}

fn truncate(s: &str) -> String {
    const MAX: usize = 200;
    if s.chars().count() <= MAX {
        s.to_string()
    } else {
        format!("{}...", s.chars().take(MAX).collect::<String>())
    }
}

/// Removes commas that directly precede a closing `}` or `]`, outside strings.
fn strip_trailing_commas(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_string = false;
    let mut escaped = false;
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if !matches!(next, Some('}') | Some(']')) {
                    out.push(c);
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Strict JSON, then JSON with trailing commas removed (the prompt samples
/// themselves carry trailing commas, and models copy them).
pub fn parse_json_lenient(text: &str) -> Result<Value, FenceError> {
    serde_json::from_str(text.trim())
        .or_else(|_| serde_json::from_str(strip_trailing_commas(text).trim()))
        .map_err(|_| FenceError { raw: text.to_string() })
}

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    hay.to_ascii_lowercase().find(&needle.to_ascii_lowercase())
}

/// The body of the first fence opened with `open`, if any.
fn fenced_body<'a>(text: &'a str, open: &str) -> Option<&'a str> {
    let start = find_ci(text, open)? + open.len();
    let rest = &text[start..];
    // The closing fence is normally on its own line; JSON never holds a raw newline
    // inside a string, so "\n```" cannot occur in the payload.
    let end = rest.find("\n```").or_else(|| rest.find("```"))?;
    Some(&rest[..end])
}

/// Parses the first ```` ```json ```` fenced block, falling back to a bare
/// ```` ``` ```` fence and then to the whole text.
pub fn extract_json_fence(text: &str) -> Result<Value, FenceError> {
    if let Some(body) = fenced_body(text, "```json") {
        return parse_json_lenient(body).map_err(|_| FenceError { raw: text.to_string() });
    }
    if let Some(body) = fenced_body(text, "```") {
        if let Ok(v) = parse_json_lenient(body) {
            return Ok(v);
        }
    }
    parse_json_lenient(text).map_err(|_| FenceError { raw: text.to_string() })
}

/// Pretty-prints `value` inside a ```` ```json ```` fence.
pub fn fence_wrap(value: &Value) -> String {
    format!("```json\n{}\n```", serde_json::to_string_pretty(value).expect("json serializes"))
}
