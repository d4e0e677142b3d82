// SPDX-License-Identifier: Apache-2.0

//! Stand-off annotation over immutable message text.
//!
//! An [`AnnotatedDocument`] owns its text and a list of typed spans. Spans are
//! half-open `[start, end)` ranges of Unicode scalar values (not bytes).
//! Annotators never edit the text; they only append annotations, so the
//! document can be queried as a graph of overlapping spans through
//! [`AnnotatedDocument::annotations_in`].

mod gazetteer;
mod pipeline;
mod tokenize;

pub use gazetteer::{gazetteer_lookup, Gazetteer, GazetteerEntry, GazetteerError};
pub use pipeline::{run_pipeline, Annotator, Pipeline, Resources};
pub use tokenize::{tokenize, TokenSpan};

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::message::Message;

pub const TOKEN: &str = "Token";
pub const HASHTAG: &str = "Hashtag";
pub const MENTION: &str = "Mention";
pub const URL: &str = "URL";
pub const LOOKUP: &str = "Lookup";
pub const ENTITY: &str = "Entity";

/// Annotation types emitted by the tokenizer.
pub const TOKEN_TYPES: [&str; 4] = [TOKEN, HASHTAG, MENTION, URL];

pub type Features = BTreeMap<String, String>;

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("unknown pipeline stage {0:?}")]
    UnknownStage(String),
    #[error("stage {stage:?} needs {missing:?} annotations, which no earlier stage produces")]
    StageDependencyViolation { stage: String, missing: String },
    #[error("stage {stage:?} needs the {resource} resource")]
    MissingResource { stage: String, resource: &'static str },
    #[error("annotation {id} span {start}..{end} outside text of length {len}")]
    SpanOutOfBounds {
        id: u32,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("duplicate annotation id {0}")]
    DuplicateId(u32),
}

/// Input unit of the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub source: Option<Message>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            text: text.into(),
            source: None,
        }
    }

    pub fn from_message(doc_id: impl Into<String>, message: Message) -> Self {
        Self {
            doc_id: doc_id.into(),
            text: message.text.clone(),
            source: Some(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub start: usize,
    pub end: usize,
    #[serde(default)]
    pub features: Features,
}

impl Annotation {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }

    fn sort_key(&self) -> (usize, usize, u32) {
        (self.start, self.end, self.id)
    }
}

/// Does `[start, end)` intersect `window`?
///
/// A zero-width window at `p` hits spans with `start <= p < end`. A zero-width
/// span at `q` is hit by windows with `window.start <= q < window.end`.
pub fn overlaps(start: usize, end: usize, window: &Range<usize>) -> bool {
    if window.start == window.end {
        start <= window.start && window.start < end
    } else if start == end {
        window.start <= start && start < window.end
    } else {
        start < window.end && window.start < end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument", into = "RawDocument")]
pub struct AnnotatedDocument {
    doc_id: String,
    text: String,
    /// Byte offset of every char, plus the text length.
    char_starts: Vec<usize>,
    annotations: Vec<Annotation>,
    /// Indices into `annotations`, sorted by (start, end, id).
    by_start: Vec<usize>,
    next_id: u32,
}

#[derive(Serialize, Deserialize)]
struct RawDocument {
    doc_id: String,
    text: String,
    annotations: Vec<Annotation>,
}

impl TryFrom<RawDocument> for AnnotatedDocument {
    type Error = AnnotateError;

    fn try_from(raw: RawDocument) -> Result<Self, AnnotateError> {
        let mut doc = AnnotatedDocument::new(raw.doc_id, raw.text);
        for ann in raw.annotations {
            doc.insert(ann)?;
        }
        Ok(doc)
    }
}

impl From<AnnotatedDocument> for RawDocument {
    fn from(doc: AnnotatedDocument) -> Self {
        RawDocument {
            doc_id: doc.doc_id,
            text: doc.text,
            annotations: doc.annotations,
        }
    }
}

impl AnnotatedDocument {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let mut char_starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        char_starts.push(text.len());
        Self {
            doc_id: doc_id.into(),
            text,
            char_starts,
            annotations: Vec::new(),
            by_start: Vec::new(),
            next_id: 0,
        }
    }

    pub fn from_document(doc: &Document) -> Self {
        Self::new(doc.doc_id.clone(), doc.text.clone())
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Text length in chars.
    pub fn len_chars(&self) -> usize {
        self.char_starts.len() - 1
    }

    /// Annotations in insertion (stage) order.
    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn get(&self, id: u32) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.id == id)
    }

    /// Text under a char span. Panics if the span is out of bounds.
    pub fn slice(&self, span: Range<usize>) -> &str {
        &self.text[self.char_starts[span.start]..self.char_starts[span.end]]
    }

    pub fn covered_text(&self, ann: &Annotation) -> &str {
        self.slice(ann.span())
    }

    /// Appends an annotation with the next dense id.
    pub fn add(
        &mut self,
        kind: impl Into<String>,
        span: Range<usize>,
        features: Features,
    ) -> Result<u32, AnnotateError> {
        let id = self.next_id;
        self.insert(Annotation {
            id,
            kind: kind.into(),
            start: span.start,
            end: span.end,
            features,
        })?;
        Ok(id)
    }

    fn insert(&mut self, ann: Annotation) -> Result<(), AnnotateError> {
        if ann.start > ann.end || ann.end > self.len_chars() {
            return Err(AnnotateError::SpanOutOfBounds {
                id: ann.id,
                start: ann.start,
                end: ann.end,
                len: self.len_chars(),
            });
        }
        if ann.id < self.next_id && self.annotations.iter().any(|a| a.id == ann.id) {
            return Err(AnnotateError::DuplicateId(ann.id));
        }
        let key = ann.sort_key();
        let pos = self
            .by_start
            .partition_point(|&i| self.annotations[i].sort_key() < key);
        self.by_start.insert(pos, self.annotations.len());
        self.next_id = self.next_id.max(ann.id.saturating_add(1));
        self.annotations.push(ann);
        Ok(())
    }

    /// Annotations of the given types (all types for `None`) that overlap
    /// `window`, ordered by (start, end, id). See [`overlaps`] for the
    /// zero-width rules. The window is clamped to the text.
    pub fn annotations_in(&self, types: Option<&[&str]>, window: Range<usize>) -> Vec<&Annotation> {
        let len = self.len_chars();
        let window = window.start.min(len)..window.end.min(len).max(window.start.min(len));
        // No annotation starting past the window end can overlap it.
        let limit = window.end.max(window.start + 1);
        let cut = self
            .by_start
            .partition_point(|&i| self.annotations[i].start < limit);
        self.by_start[..cut]
            .iter()
            .map(|&i| &self.annotations[i])
            .filter(|a| types.is_none_or(|t| t.contains(&a.kind.as_str())))
            .filter(|a| overlaps(a.start, a.end, &window))
            .collect()
    }

    /// Annotations of one type in (start, end, id) order.
    pub fn of_type(&self, kind: &str) -> Vec<&Annotation> {
        self.by_start
            .iter()
            .map(|&i| &self.annotations[i])
            .filter(|a| a.kind == kind)
            .collect()
    }

    pub fn count_of(&self, kind: &str) -> usize {
        self.annotations.iter().filter(|a| a.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serialization is infallible")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
