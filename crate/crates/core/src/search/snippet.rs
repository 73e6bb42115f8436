use crate::text::tokenize_with_spans;

pub const MARK_START: char = '\u{1}';
pub const MARK_END: char = '\u{2}';
/// Tokens kept on each side of the first match.
pub const SNIPPET_RADIUS: usize = 8;

/// Window around the first query-term occurrence with every matched token
/// wrapped in `\u{1}` / `\u{2}`. Without a match, the opening tokens are
/// returned unmarked.
pub fn make_snippet(text: &str, terms: &[String]) -> String {
    let tokens = tokenize_with_spans(text);
    if tokens.is_empty() {
        return String::new();
    }
    let is_match = |t: &str| terms.iter().any(|q| q == t);
    let (lo, hi) = match tokens.iter().position(|t| is_match(&t.term)) {
        Some(i) => (
            i.saturating_sub(SNIPPET_RADIUS),
            (i + SNIPPET_RADIUS + 1).min(tokens.len()),
        ),
        None => (0, (2 * SNIPPET_RADIUS + 1).min(tokens.len())),
    };

    let mut out = String::new();
    if lo > 0 {
        out.push_str("… ");
    }
    let mut cursor = tokens[lo].span.start;
    for tok in &tokens[lo..hi] {
        out.push_str(&text[cursor..tok.span.start]);
        if is_match(&tok.term) {
            out.push(MARK_START);
            out.push_str(&text[tok.span.clone()]);
            out.push(MARK_END);
        } else {
            out.push_str(&text[tok.span.clone()]);
        }
        cursor = tok.span.end;
    }
    if hi < tokens.len() {
        out.push_str(" …");
    }
    // keep the snippet on one line
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
