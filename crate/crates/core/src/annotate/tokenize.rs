// SPDX-License-Identifier: Apache-2.0

//! Tweet-aware tokenizer.
//!
//! Every maximal non-whitespace run is split left to right into:
//! - `URL`: a run tail starting with `scheme://` and at least one more char
//! - `Hashtag` / `Mention`: `#` or `@` followed by word chars
//! - `Token` (kind `word` or `number`): a run of word chars
//! - `Token` (kind `punct`): any other single char
//!
//! Word chars are alphanumerics and `_`. The spans partition the
//! non-whitespace chars of the text.

use std::ops::Range;

use super::{Features, HASHTAG, MENTION, TOKEN, URL};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub kind: &'static str,
    /// Char offsets.
    pub span: Range<usize>,
    pub features: Features,
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn word_end(chars: &[char], from: usize, limit: usize) -> usize {
    chars[from..limit]
        .iter()
        .position(|&c| !is_word(c))
        .map_or(limit, |p| from + p)
}

/// Whether a `scheme://x` prefix starts at `at`.
fn url_at(chars: &[char], at: usize, limit: usize) -> bool {
    if !chars[at].is_ascii_alphabetic() {
        return false;
    }
    let mut i = at + 1;
    while i < limit && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '+' | '.' | '-')) {
        i += 1;
    }
    i + 3 < limit && chars[i] == ':' && chars[i + 1] == '/' && chars[i + 2] == '/'
}

fn feature(key: &str, value: impl Into<String>) -> Features {
    let mut f = Features::new();
    f.insert(key.to_string(), value.into());
    f
}

pub fn tokenize(text: &str) -> Vec<TokenSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let run_end = chars[i..]
            .iter()
            .position(|c| c.is_whitespace())
            .map_or(chars.len(), |p| i + p);
        let mut k = i;
        while k < run_end {
            let c = chars[k];
            if is_word(c) {
                if url_at(&chars, k, run_end) {
                    let scheme: String = chars[k..].iter().take_while(|&&c| c != ':').collect();
                    out.push(TokenSpan {
                        kind: URL,
                        span: k..run_end,
                        features: feature("scheme", scheme.to_ascii_lowercase()),
                    });
                    k = run_end;
                    continue;
                }
                let end = word_end(&chars, k, run_end);
                let numeric = chars[k..end].iter().all(|c| c.is_numeric());
                out.push(TokenSpan {
                    kind: TOKEN,
                    span: k..end,
                    features: feature("kind", if numeric { "number" } else { "word" }),
                });
                k = end;
            } else if (c == '#' || c == '@') && k + 1 < run_end && is_word(chars[k + 1]) {
                let end = word_end(&chars, k + 1, run_end);
                let body: String = chars[k + 1..end].iter().collect();
                let (kind, f) = if c == '#' {
                    (HASHTAG, feature("tag", body.to_lowercase()))
                } else {
                    (MENTION, feature("user", body))
                };
                out.push(TokenSpan {
                    kind,
                    span: k..end,
                    features: f,
                });
                k = end;
            } else {
                out.push(TokenSpan {
                    kind: TOKEN,
                    span: k..k + 1,
                    features: feature("kind", "punct"),
                });
                k += 1;
            }
        }
        i = run_end;
    }
    out
}
