use std::collections::HashMap;

use super::RenderError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Segment {
    Text(String),
    Var(String),
    Section(String, Vec<Segment>),
}

/// Scalar placeholders plus named repeating sections.
#[derive(Debug, Default)]
pub(crate) struct Context {
    pub scalars: HashMap<&'static str, String>,
    pub sections: HashMap<&'static str, Vec<HashMap<&'static str, String>>>,
}

pub(crate) fn parse(body: &str) -> Result<Vec<Segment>, RenderError> {
    let mut stack: Vec<(String, Vec<Segment>)> = vec![(String::new(), Vec::new())];
    let mut rest = body;
    while let Some(open) = rest.find("{{") {
        if open > 0 {
            stack.last_mut().expect("root").1.push(Segment::Text(rest[..open].to_string()));
        }
        let after = &rest[open + 2..];
        let close = after.find("}}").ok_or_else(|| RenderError::Malformed("unterminated {{".into()))?;
        let tag = after[..close].trim();
        rest = &after[close + 2..];

        if let Some(name) = tag.strip_prefix('#') {
            stack.push((name.trim().to_string(), Vec::new()));
        } else if let Some(name) = tag.strip_prefix('/') {
            let (open_name, segs) = stack.pop().expect("root");
            if stack.is_empty() || open_name != name.trim() {
                return Err(RenderError::Malformed(format!("{{{{/{}}}}} does not close an open section", name.trim())));
            }
            stack.last_mut().expect("root").1.push(Segment::Section(open_name, segs));
        } else if tag.is_empty() {
            return Err(RenderError::Malformed("empty placeholder".into()));
        } else {
            stack.last_mut().expect("root").1.push(Segment::Var(tag.to_string()));
        }
    }
    if !rest.is_empty() {
        stack.last_mut().expect("root").1.push(Segment::Text(rest.to_string()));
    }
    if stack.len() != 1 {
        return Err(RenderError::Malformed(format!("section {{{{#{}}}}} is never closed", stack.last().expect("open").0)));
    }
    Ok(stack.pop().expect("root").1)
}

pub(crate) fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

pub(crate) fn render(segments: &[Segment], ctx: &Context, out: &mut String) -> Result<(), RenderError> {
    render_in(segments, ctx, None, out)
}

fn render_in(
    segments: &[Segment],
    ctx: &Context,
    row: Option<&HashMap<&'static str, String>>,
    out: &mut String,
) -> Result<(), RenderError> {
    for seg in segments {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Var(name) => {
                let v = row
                    .and_then(|r| r.get(name.as_str()))
                    .or_else(|| ctx.scalars.get(name.as_str()))
                    .ok_or_else(|| RenderError::UnresolvedPlaceholder(name.clone()))?;
                out.push_str(&escape_html(v));
            }
            Segment::Section(name, body) => {
                if row.is_some() {
                    return Err(RenderError::Malformed(format!("nested section {{{{#{name}}}}}")));
                }
                let rows = ctx
                    .sections
                    .get(name.as_str())
                    .ok_or_else(|| RenderError::UnresolvedPlaceholder(format!("#{name}")))?;
                for r in rows {
                    render_in(body, ctx, Some(r), out)?;
                }
            }
        }
    }
    Ok(())
}

/// Every placeholder name used in `segments`, sections prefixed with `#`.
pub(crate) fn placeholders(segments: &[Segment]) -> Vec<String> {
    let mut out = Vec::new();
    for seg in segments {
        match seg {
            Segment::Var(n) => out.push(n.clone()),
            Segment::Section(n, body) => {
                out.push(format!("#{n}"));
                out.extend(placeholders(body));
            }
            Segment::Text(_) => {}
        }
    }
    out
}
