// SPDX-License-Identifier: Apache-2.0

//! Tweet capture files: record parsing, keyword filtering and the
//! reconnecting collector.

mod backoff;
mod collect;

pub use backoff::{BackoffPolicy, BackoffSchedule, BackoffState, FailureMode, Outcome};
pub use collect::{
    collect, parse_fault_script, CollectError, CollectOptions, CollectStats, RecordSource, DEFAULT_DEDUPE_WINDOW,
    ReplaySource, ScriptStep, ScriptedSource, Sleeper, SourceEvent, ThreadSleeper, VirtualClock,
};

use chrono::{DateTime, Utc};
use serde_json::Value;

use crate::message::{Message, TWITTER_STREAM};

/// Wire format of `created_at`, e.g. `Mon Jun 01 00:03:12 +0000 2015`.
pub const CREATED_AT_FORMAT: &str = "%a %b %d %H:%M:%S %z %Y";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub user: String,
    pub text: String,
    /// Lowercased, without the leading `#`.
    pub hashtags: Vec<String>,
}

impl TweetRecord {
    pub fn into_message(self) -> Message {
        Message::new(TWITTER_STREAM, self.created_at, self.user, self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed tweet record: {0}")]
pub struct MalformedRecord(pub String);

fn malformed(reason: impl Into<String>) -> MalformedRecord {
    MalformedRecord(reason.into())
}

fn tweet_id(v: &Value) -> Result<u64, MalformedRecord> {
    if let Some(id) = v.get("id_str").and_then(Value::as_str) {
        return id.parse().map_err(|_| malformed(format!("bad id_str {id:?}")));
    }
    match v.get("id") {
        Some(Value::Number(n)) => n.as_u64().ok_or_else(|| malformed(format!("bad id {n}"))),
        Some(Value::String(s)) => s.parse().map_err(|_| malformed(format!("bad id {s:?}"))),
        _ => Err(malformed("missing id")),
    }
}

/// Parses one sanitized JSON line.
pub fn parse_tweet(line: &str) -> Result<TweetRecord, MalformedRecord> {
    let v: Value = serde_json::from_str(line).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
    if !v.is_object() {
        return Err(malformed("record is not an object"));
    }
    let id = tweet_id(&v)?;
    let created = v
        .get("created_at")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing created_at"))?;
    let created_at = DateTime::parse_from_str(created, CREATED_AT_FORMAT)
        .map_err(|e| malformed(format!("bad created_at {created:?}: {e}")))?
        .with_timezone(&Utc);
    let user = v
        .pointer("/user/screen_name")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing user.screen_name"))?
        .to_string();
    let text = v
        .get("text")
        .and_then(Value::as_str)
        .ok_or_else(|| malformed("missing text"))?
        .to_string();
    let hashtags = match v.pointer("/entities/hashtags") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(tags)) => tags
            .iter()
            .filter_map(|t| t.get("text").and_then(Value::as_str))
            .map(|t| t.trim_start_matches('#').to_lowercase())
            .collect(),
        Some(_) => return Err(malformed("entities.hashtags is not an array")),
    };
    Ok(TweetRecord {
        id,
        created_at,
        user,
        text,
        hashtags,
    })
}

/// Case-insensitive keyword filter over tweet text and hashtags.
///
/// In whole-word mode a keyword matches a run of consecutive alphanumeric
/// words in the text, so `bitcoin` matches `#Bitcoin!` but not `bitcoins`.
/// Substring mode matches anywhere.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    keywords: Vec<Keyword>,
    substring: bool,
}

#[derive(Debug, Clone)]
struct Keyword {
    lowered: String,
    words: Vec<String>,
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

impl KeywordMatcher {
    pub const DEFAULT_KEYWORDS: &'static [&'static str] = &["bitcoin"];

    /// Returns `None` if no usable keyword is given.
    pub fn new<S: AsRef<str>>(keywords: &[S], substring: bool) -> Option<Self> {
        let keywords: Vec<Keyword> = keywords
            .iter()
            .map(|k| k.as_ref().trim().trim_start_matches('#'))
            .filter(|k| !k.is_empty())
            .map(|k| Keyword {
                lowered: k.to_lowercase(),
                words: words(k).collect(),
            })
            .filter(|k| !k.words.is_empty() || substring)
            .collect();
        if keywords.is_empty() {
            return None;
        }
        Some(Self { keywords, substring })
    }

    pub fn matches(&self, text: &str, hashtags: &[String]) -> bool {
        let tag_hit = hashtags
            .iter()
            .any(|h| self.keywords.iter().any(|k| h.to_lowercase() == k.lowered));
        if tag_hit {
            return true;
        }
        if self.substring {
            let lowered = text.to_lowercase();
            return self.keywords.iter().any(|k| lowered.contains(&k.lowered));
        }
        let text_words: Vec<String> = words(text).collect();
        self.keywords.iter().any(|k| {
            text_words
                .windows(k.words.len())
                .any(|w| w == k.words.as_slice())
        })
    }

    pub fn matches_record(&self, record: &TweetRecord) -> bool {
        self.matches(&record.text, &record.hashtags)
    }
}

impl Default for KeywordMatcher {
    fn default() -> Self {
        Self::new(Self::DEFAULT_KEYWORDS, false).expect("default keywords are valid")
    }
}

/// Whole-word keyword test. An empty keyword list falls back to `bitcoin`.
pub fn matches_keywords<S: AsRef<str>>(text: &str, hashtags: &[String], keywords: &[S]) -> bool {
    KeywordMatcher::new(keywords, false)
        .unwrap_or_default()
        .matches(text, hashtags)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"id":1,"created_at":"Mon Jun 01 00:03:12 +0000 2015","user":{"screen_name":"al"},"text":"Bitcoin up"}"#;

    #[test]
    fn minimal_record() {
        let t = parse_tweet(MINIMAL).unwrap();
        assert_eq!(t.text, "Bitcoin up");
        assert!(t.hashtags.is_empty());
        assert_eq!(t.id, 1);
        assert_eq!(t.user, "al");
        assert_eq!(t.created_at.to_rfc3339(), "2015-06-01T00:03:12+00:00");
    }

    #[test]
    fn hashtags_are_lowercased() {
        let line = r#"{"id_str":"629","created_at":"Tue Jun 02 10:00:00 +0000 2015","user":{"screen_name":"b"},"text":"x","entities":{"hashtags":[{"text":"Bitcoin"}]}}"#;
        let t = parse_tweet(line).unwrap();
        assert_eq!(t.hashtags, vec!["bitcoin"]);
        assert_eq!(t.id, 629);
    }

    #[test]
    fn id_str_beats_lossy_id() {
        let line = r#"{"id":6.29e17,"id_str":"629000000000000001","created_at":"Tue Jun 02 10:00:00 +0000 2015","user":{"screen_name":"b"},"text":"x"}"#;
        assert_eq!(parse_tweet(line).unwrap().id, 629000000000000001);
    }

    #[test]
    fn malformed_records() {
        assert!(parse_tweet(&MINIMAL[..40]).is_err());
        assert!(parse_tweet("[]").is_err());
        assert!(parse_tweet(r#"{"id":1,"created_at":"yesterday","user":{"screen_name":"a"},"text":""}"#).is_err());
        assert!(parse_tweet(r#"{"id":1,"created_at":"Mon Jun 01 00:03:12 +0000 2015","text":""}"#).is_err());
        assert!(parse_tweet(r#"{"created_at":"Mon Jun 01 00:03:12 +0000 2015","user":{"screen_name":"a"},"text":""}"#).is_err());
    }

    #[test]
    fn keyword_case_and_words() {
        let none: Vec<String> = vec![];
        assert!(matches_keywords("BiTcOiN rally", &none, &["bitcoin"]));
        assert!(!matches_keywords("bit coin", &none, &["bitcoin"]));
        assert!(matches_keywords("nothing", &["bitcoin".into()], &["bitcoin"]));
        assert!(!matches_keywords("bitcoins everywhere", &none, &["bitcoin"]));
        assert!(matches_keywords("#Bitcoin!", &none, &["bitcoin"]));
    }

    #[test]
    fn substring_mode() {
        let m = KeywordMatcher::new(&["bitcoin"], true).unwrap();
        assert!(m.matches("bitcoins everywhere", &[]));
        assert!(!m.matches("bit coin", &[]));
    }

    #[test]
    fn multiword_keyword() {
        let m = KeywordMatcher::new(&["bitcoin cash"], false).unwrap();
        assert!(m.matches("Bitcoin  Cash forks", &[]));
        assert!(!m.matches("bitcoin is cash", &[]));
    }

    #[test]
    fn empty_keywords_rejected() {
        assert!(KeywordMatcher::new(&["", "#"], false).is_none());
    }
}
