/// Tags whose boundaries start a new text line.
const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "div", "dl", "dt", "fieldset",
    "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "html", "legend", "li", "main",
    "nav", "ol", "p", "pre", "section", "table", "tbody", "tfoot", "thead", "tr", "ul",
];

/// Tags whose content is not document text.
const SKIP_TAGS: &[&str] = &["head", "script", "style", "title"];

const CELL_SEPARATOR: &str = " | ";

fn looks_like_markup(s: &str) -> bool {
    let b = s.as_bytes();
    b.windows(2).any(|w| w[0] == b'<' && (w[1].is_ascii_alphabetic() || w[1] == b'/' || w[1] == b'!'))
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let ent = &tail[1..semi];
            let ch = match ent {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" | "#39" => Some('\''),
                "nbsp" => Some(' '),
                _ => ent
                    .strip_prefix('#')
                    .and_then(|n| n.strip_prefix('x').map(|h| u32::from_str_radix(h, 16).ok()).unwrap_or_else(|| n.parse().ok()))
                    .and_then(char::from_u32),
            };
            ch.map(|c| (c, semi + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

struct Lines {
    lines: Vec<String>,
    current: String,
    cells_in_row: usize,
}

impl Lines {
    fn flush(&mut self) {
        let line = self.current.split_whitespace().collect::<Vec<_>>().join(" ");
        if !line.is_empty() {
            self.lines.push(line);
        }
        self.current.clear();
    }
}

/// Converts document markup to plain text. Block-level boundaries become
/// line breaks and table cells are joined left to right with ` | `. Input
/// without markup is returned unchanged.
pub fn html_to_text(content: &str) -> String {
    if !looks_like_markup(content) {
        return content.to_string();
    }
    let mut out = Lines { lines: Vec::new(), current: String::new(), cells_in_row: 0 };
    let mut skip_depth = 0usize;
    let mut rest = content;

    while !rest.is_empty() {
        let Some(lt) = rest.find('<') else {
            if skip_depth == 0 {
                out.current.push_str(&decode_entities(rest));
            }
            break;
        };
        if skip_depth == 0 {
            out.current.push_str(&decode_entities(&rest[..lt]));
        }
        let tail = &rest[lt..];

        if let Some(comment) = tail.strip_prefix("<!--") {
            rest = comment.find("-->").map_or("", |e| &comment[e + 3..]);
            continue;
        }
        let next = tail.as_bytes().get(1).copied().unwrap_or(b' ');
        if !(next.is_ascii_alphabetic() || next == b'/' || next == b'!') {
            if skip_depth == 0 {
                out.current.push('<');
            }
            rest = &tail[1..];
            continue;
        }
        let Some(gt) = tail.find('>') else {
            break;
        };
        let inner = &tail[1..gt];
        rest = &tail[gt + 1..];

        let closing = inner.starts_with('/');
        let name: String = inner
            .trim_start_matches('/')
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();

        if SKIP_TAGS.contains(&name.as_str()) {
            if closing {
                skip_depth = skip_depth.saturating_sub(1);
            } else if !inner.ends_with('/') {
                skip_depth += 1;
            }
            continue;
        }
        if skip_depth > 0 {
            continue;
        }
        if BLOCK_TAGS.contains(&name.as_str()) {
            out.flush();
            if name == "tr" {
                out.cells_in_row = 0;
            }
        } else if (name == "td" || name == "th") && !closing {
            if out.cells_in_row > 0 {
                out.current.push_str(CELL_SEPARATOR);
            }
            out.cells_in_row += 1;
        }
    }
    out.flush();
    out.lines.join("\n")
}
