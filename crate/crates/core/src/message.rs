// SPDX-License-Identifier: Apache-2.0

//! The normalized record shared by every stage, and its JSON-lines form.

use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDate, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

/// Stream id used for all tweets.
pub const TWITTER_STREAM: &str = "twitter";

/// One chat line or tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub stream_id: String,
    #[serde(with = "utc_seconds")]
    pub ts: DateTime<Utc>,
    pub author: String,
    pub text: String,
}

impl Message {
    /// Builds a message, truncating the timestamp to whole seconds.
    pub fn new(
        stream_id: impl Into<String>,
        ts: DateTime<Utc>,
        author: impl Into<String>,
        text: impl Into<String>,
    ) -> Self {
        Self {
            stream_id: stream_id.into(),
            ts: ts.trunc_subsecs(0),
            author: author.into(),
            text: text.into(),
        }
    }

    /// UTC calendar day of the message.
    pub fn date(&self) -> NaiveDate {
        self.ts.date_naive()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("message serialization is infallible")
    }

    pub fn from_json_line(line: &str) -> serde_json::Result<Self> {
        serde_json::from_str(line)
    }
}

/// Stream id for an IRC channel, e.g. `irc:#bitcoin`.
pub fn irc_stream_id(channel: &str) -> String {
    format!("irc:{channel}")
}

/// Optional `[start, end)` collection window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CollectionWindow {
    pub start: Option<DateTime<Utc>>,
    pub end: Option<DateTime<Utc>>,
}

impl CollectionWindow {
    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start.is_none_or(|s| ts >= s) && self.end.is_none_or(|e| ts < e)
    }
}

/// Writes messages as JSON-lines.
pub struct MessageWriter<W: Write> {
    inner: W,
    written: u64,
}

impl<W: Write> MessageWriter<W> {
    pub fn new(inner: W) -> Self {
        Self { inner, written: 0 }
    }

    pub fn write(&mut self, message: &Message) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.inner, message)?;
        self.inner.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Error from [`read_messages`], carrying the 1-based line number.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: u64,
        #[source]
        source: serde_json::Error,
    },
}

/// Streams messages out of a JSON-lines reader. Blank lines are skipped.
pub fn read_messages<R: BufRead>(reader: R) -> impl Iterator<Item = Result<Message, ReadError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, line)| match line {
            Err(e) => Some(Err(ReadError::Io(e))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Message::from_json_line(&l).map_err(|source| ReadError::Json {
                line: idx as u64 + 1,
                source,
            })),
        })
}

mod utc_seconds {
    use chrono::{DateTime, SubsecRound, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&ts.format(FORMAT))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc).trunc_subsecs(0))
            .map_err(serde::de::Error::custom)
    }
}
