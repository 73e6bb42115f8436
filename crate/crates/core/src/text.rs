//! Text analysis shared by name resolution, indexing and evaluation.

use std::ops::Range;

use unicode_normalization::char::{decompose_canonical, is_combining_mark};

/// Lowercases one character, decomposes it canonically and drops combining
/// marks, feeding the surviving characters to `out`.
fn fold_char(c: char, mut out: impl FnMut(char)) {
    for lower in c.to_lowercase() {
        decompose_canonical(lower, |d| {
            if !is_combining_mark(d) {
                out(d)
            }
        });
    }
}

/// Casefolds, strips diacritics and collapses whitespace.
///
/// `"  João  SILVA "` becomes `"joao silva"`.
pub fn normalize_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        fold_char(c, |d| {
            if d.is_whitespace() {
                pending_space = true;
            } else {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(d);
            }
        });
    }
    out
}

/// A token plus the byte range of the source text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub term: String,
    pub span: Range<usize>,
}

/// Splits text into folded alphanumeric runs, keeping source offsets.
pub fn tokenize_with_spans(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    let mut end = 0usize;
    let mut pieces: Vec<char> = Vec::with_capacity(4);
    for (offset, c) in text.char_indices() {
        let next = offset + c.len_utf8();
        pieces.clear();
        fold_char(c, |d| pieces.push(d));
        if pieces.is_empty() {
            // a lone combining mark continues whatever run it sits in
            if !current.is_empty() {
                end = next;
            }
            continue;
        }
        for &d in &pieces {
            if d.is_alphanumeric() {
                if current.is_empty() {
                    start = offset;
                }
                current.push(d);
                end = next;
            } else if !current.is_empty() {
                tokens.push(Token {
                    term: std::mem::take(&mut current),
                    span: start..end,
                });
            }
        }
    }
    if !current.is_empty() {
        tokens.push(Token {
            term: current,
            span: start..end,
        });
    }
    tokens
}

/// Folded alphanumeric runs; no stemming, no stopwords, digits kept.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_with_spans(text).into_iter().map(|t| t.term).collect()
}
