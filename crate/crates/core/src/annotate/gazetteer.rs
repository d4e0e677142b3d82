// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::io::BufRead;

use super::tokenize::tokenize;
use super::{AnnotatedDocument, Features, TOKEN_TYPES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub major_type: String,
    pub minor_type: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GazetteerError {
    #[error("gazetteer line {line}: expected `surface<TAB>major<TAB>minor`")]
    MalformedLine { line: usize },
    #[error("gazetteer line {line}: surface form has no tokens")]
    EmptySurface { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Case-insensitive surface-form lookup list.
///
/// Surface forms are keyed by their token sequence, so `Bitcoin  Cash` and
/// `bitcoin cash` are the same entry and `bitcoin-cash` is a different one.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<String, GazetteerEntry>,
    max_tokens: usize,
}

/// Joins token surfaces with a single space wherever whitespace separated
/// them, lowercased.
fn key_from_spans<'a>(spans: impl Iterator<Item = (usize, usize, &'a str)>) -> String {
    let mut key = String::new();
    let mut prev_end = None;
    for (start, end, surface) in spans {
        if prev_end.is_some_and(|p| p < start) {
            key.push(' ');
        }
        key.push_str(&surface.to_lowercase());
        prev_end = Some(end);
    }
    key
}

fn surface_key(surface: &str) -> (String, usize) {
    let chars: Vec<char> = surface.chars().collect();
    let tokens = tokenize(surface);
    let pieces: Vec<(usize, usize, String)> = tokens
        .iter()
        .map(|t| (t.span.start, t.span.end, chars[t.span.clone()].iter().collect()))
        .collect();
    let key = key_from_spans(pieces.iter().map(|(s, e, t)| (*s, *e, t.as_str())));
    (key, tokens.len())
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry. Returns `false` for a surface with no tokens.
    pub fn insert(&mut self, surface: &str, major: &str, minor: &str) -> bool {
        let (key, n) = surface_key(surface);
        if n == 0 {
            return false;
        }
        self.max_tokens = self.max_tokens.max(n);
        self.entries.insert(
            key,
            GazetteerEntry {
                major_type: major.to_string(),
                minor_type: minor.to_string(),
            },
        );
        true
    }

    /// Reads `surface<TAB>major<TAB>minor` lines. Blank lines and lines
    /// starting with `#` followed by a space are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, GazetteerError> {
        let mut g = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with("# ") {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, major, minor] = fields[..] else {
                return Err(GazetteerError::MalformedLine { line: i + 1 });
            };
            if !g.insert(surface, major.trim(), minor.trim()) {
                return Err(GazetteerError::EmptySurface { line: i + 1 });
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&GazetteerEntry> {
        self.entries.get(&surface_key(surface).0)
    }

    fn get_key(&self, key: &str) -> Option<&GazetteerEntry> {
        self.entries.get(key)
    }
}

/// One `Lookup` span per leftmost-longest gazetteer match over consecutive
/// tokenizer annotations of `doc`. Returns `(start, end, features)`.
pub fn gazetteer_lookup(doc: &AnnotatedDocument, gazetteer: &Gazetteer) -> Vec<(usize, usize, Features)> {
    let mut tokens: Vec<_> = doc
        .annotations()
        .iter()
        .filter(|a| TOKEN_TYPES.contains(&a.kind.as_str()))
        .collect();
    tokens.sort_by_key(|a| (a.start, a.end, a.id));
    let mut out = Vec::new();
    if gazetteer.is_empty() {
        return out;
    }
    let mut i = 0;
    while i < tokens.len() {
        let mut best = None;
        let mut key = String::new();
        for j in i..tokens.len().min(i + gazetteer.max_tokens) {
            if j > i && tokens[j].start > tokens[j - 1].end {
                key.push(' ');
            }
            key.push_str(&doc.covered_text(tokens[j]).to_lowercase());
            if let Some(entry) = gazetteer.get_key(&key) {
                best = Some((j, entry));
            }
        }
        match best {
            Some((j, entry)) => {
                let mut f = Features::new();
                f.insert("major_type".into(), entry.major_type.clone());
                f.insert("minor_type".into(), entry.minor_type.clone());
                out.push((tokens[i].start, tokens[j].end, f));
                i = j + 1;
            }
            None => i += 1,
        }
    }
    out
}
