use serde::{Deserialize, Serialize};

/// Longest accepted headline, in characters.
pub const MAX_HEADLINE_CHARS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    #[error("empty response")]
    Empty,
    #[error("response longer than {MAX_HEADLINE_CHARS} characters")]
    TooLong,
    #[error("response contains multi-line commentary")]
    MultilineCommentary,
}

const QUOTE_PAIRS: [(char, char); 5] = [
    ('"', '"'),
    ('\'', '\''),
    ('\u{201c}', '\u{201d}'),
    ('\u{2018}', '\u{2019}'),
    ('`', '`'),
];

/// Reduce a raw model response to a single-line headline.
///
/// Surrounding whitespace and wrapping quotation marks are stripped, lines
/// are joined with single spaces. A response with more than one
/// sentence-terminated line is treated as commentary and rejected.
pub fn sanitize_response(raw: &str) -> Result<String, Rejection> {
    let lines: Vec<&str> = raw.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() > 1 {
        let terminated = lines
            .iter()
            .filter(|l| {
                let l = strip_quotes(l);
                l.ends_with(['.', '!', '?'])
            })
            .count();
        if terminated > 1 {
            return Err(Rejection::MultilineCommentary);
        }
    }
    let joined = lines
        .iter()
        .flat_map(|l| l.split_whitespace())
        .collect::<Vec<_>>()
        .join(" ");
    let text = strip_quotes(&joined);
    if text.is_empty() {
        return Err(Rejection::Empty);
    }
    if text.chars().count() > MAX_HEADLINE_CHARS {
        return Err(Rejection::TooLong);
    }
    Ok(text.to_string())
}

/// Repeatedly remove a matching pair of wrapping quotes, but only when the
/// quote character does not also occur inside (so `"A" and "B"` is kept).
fn strip_quotes(mut s: &str) -> &str {
    loop {
        s = s.trim();
        let mut stripped = false;
        for (open, close) in QUOTE_PAIRS {
            if let Some(inner) = s.strip_prefix(open).and_then(|r| r.strip_suffix(close)) {
                if !inner.contains(open) && !inner.contains(close) {
                    s = inner;
                    stripped = true;
                    break;
                }
            }
        }
        if !stripped {
            return s;
        }
    }
}
