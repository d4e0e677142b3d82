// SPDX-License-Identifier: Apache-2.0

//! IRC client log parsing.
//!
//! One event per line:
//!
//! ```text
//! [Mon Jun 1 2015] [00:03:12] <alice>	price is moving
//! [Mon Jun 1 2015] [00:04:00] *** Join: bob (bob@host) joined #bitcoin
//! ```
//!
//! Chat lines separate the `<nick>` from the text with a tab (a single space is
//! also accepted). Network lines carry a `*** <Subtype>: ` prefix; the eight
//! housekeeping subtypes in [`NetworkKind`] are dropped by [`classify`]. Any
//! other `***` subtype is kept as [`IrcEventKind::Unlisted`] unless it is added
//! to [`IrcFilter::extra_drop`].

// the format example above needs its literal tab
#![allow(clippy::tabs_in_doc_comments)]

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Month, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;

use crate::message::{irc_stream_id, CollectionWindow, Message};
use crate::sanitize::sanitize_in_place;

#[derive(Debug, thiserror::Error)]
pub enum IrcError {
    #[error("line {line}: unparsable: {reason}")]
    UnparsableLine { line: u64, reason: String },
    #[error("channel name {0:?} must start with '#'")]
    InvalidChannel(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Housekeeping message subtypes removed before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    Join,
    Topic,
    Quit,
    Mode,
    Created,
    Part,
    Nick,
    Notice,
}

impl NetworkKind {
    pub const ALL: [NetworkKind; 8] = [
        NetworkKind::Join,
        NetworkKind::Topic,
        NetworkKind::Quit,
        NetworkKind::Mode,
        NetworkKind::Created,
        NetworkKind::Part,
        NetworkKind::Nick,
        NetworkKind::Notice,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::Join => "Join",
            NetworkKind::Topic => "Topic",
            NetworkKind::Quit => "Quit",
            NetworkKind::Mode => "Mode",
            NetworkKind::Created => "Created",
            NetworkKind::Part => "Part",
            NetworkKind::Nick => "Nick",
            NetworkKind::Notice => "Notice",
        }
    }

    /// Whether the first word of the event text names the acting user.
    fn names_actor(self) -> bool {
        matches!(
            self,
            NetworkKind::Join | NetworkKind::Part | NetworkKind::Quit | NetworkKind::Nick
        )
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        NetworkKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrcEventKind {
    Chat,
    Network(NetworkKind),
    /// A `***` line whose subtype is not one of the eight housekeeping kinds.
    Unlisted(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrcEvent {
    pub timestamp: DateTime<Utc>,
    pub channel: String,
    pub kind: IrcEventKind,
    pub nick: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedLine {
    Event(IrcEvent),
    Blank,
}

/// Per-file parsing context.
#[derive(Debug, Clone)]
pub struct LogContext {
    pub channel: String,
    /// Zone the log's wall-clock times are written in.
    pub tz: Tz,
}

impl LogContext {
    pub fn new(channel: impl Into<String>) -> Result<Self, IrcError> {
        let channel = channel.into();
        if !channel.starts_with('#') || channel.len() < 2 {
            return Err(IrcError::InvalidChannel(channel));
        }
        Ok(Self {
            channel,
            tz: Tz::UTC,
        })
    }

    pub fn with_tz(mut self, tz: Tz) -> Self {
        self.tz = tz;
        self
    }
}

fn unparsable(line: u64, reason: impl Into<String>) -> IrcError {
    IrcError::UnparsableLine {
        line,
        reason: reason.into(),
    }
}

/// Splits `[inner] rest` into `(inner, rest)`.
fn bracketed(s: &str) -> Option<(&str, &str)> {
    let body = s.strip_prefix('[')?;
    let close = body.find(']')?;
    Some((&body[..close], &body[close + 1..]))
}

fn parse_date(field: &str) -> Result<NaiveDate, String> {
    let parts: Vec<&str> = field.split_whitespace().collect();
    let [dow, mon, day, year] = parts[..] else {
        return Err(format!("date field {field:?} is not `Dow Mon D YYYY`"));
    };
    let dow: Weekday = dow.parse().map_err(|_| format!("bad weekday {dow:?}"))?;
    let month: Month = mon.parse().map_err(|_| format!("bad month {mon:?}"))?;
    let day: u32 = day.parse().map_err(|_| format!("bad day {day:?}"))?;
    let year: i32 = year.parse().map_err(|_| format!("bad year {year:?}"))?;
    let date = NaiveDate::from_ymd_opt(year, month.number_from_month(), day)
        .ok_or_else(|| format!("no such date {field:?}"))?;
    if chrono::Datelike::weekday(&date) != dow {
        return Err(format!("weekday {dow} does not match {date}"));
    }
    Ok(date)
}

/// Parses one log line. `line_no` is only used for error reporting.
pub fn parse_log_line(line: &str, ctx: &LogContext, line_no: u64) -> Result<ParsedLine, IrcError> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() {
        return Ok(ParsedLine::Blank);
    }
    let err = |reason: String| unparsable(line_no, reason);

    let (date_field, rest) = bracketed(line).ok_or_else(|| err("missing [date]".into()))?;
    let date = parse_date(date_field).map_err(err)?;
    let (time_field, rest) = bracketed(rest.trim_start_matches(' '))
        .ok_or_else(|| err("missing [HH:MM:SS]".into()))?;
    let time = NaiveTime::parse_from_str(time_field, "%H:%M:%S")
        .map_err(|e| err(format!("bad time {time_field:?}: {e}")))?;
    let body = rest
        .strip_prefix(' ')
        .ok_or_else(|| err("missing separator after time".into()))?;

    let timestamp = ctx
        .tz
        .from_local_datetime(&date.and_time(time))
        .earliest()
        .ok_or_else(|| err(format!("{date} {time} does not exist in {}", ctx.tz)))?
        .with_timezone(&Utc);

    let event = |kind, nick: &str, text: &str| IrcEvent {
        timestamp,
        channel: ctx.channel.clone(),
        kind,
        nick: nick.to_string(),
        text: text.to_string(),
    };

    if let Some(chat) = body.strip_prefix('<') {
        let close = chat.find('>').ok_or_else(|| err("unterminated <nick>".into()))?;
        let nick = &chat[..close];
        if nick.is_empty() || nick.contains(char::is_whitespace) {
            return Err(err(format!("bad nick {nick:?}")));
        }
        let after = &chat[close + 1..];
        let text = match after.chars().next() {
            None => "",
            Some('\t') | Some(' ') => &after[1..],
            Some(_) => return Err(err("expected tab after <nick>".into())),
        };
        return Ok(ParsedLine::Event(event(IrcEventKind::Chat, nick, text)));
    }

    if let Some(net) = body.strip_prefix("*** ") {
        let colon = net.find(':').ok_or_else(|| err("network line without subtype".into()))?;
        let subtype = &net[..colon];
        if subtype.is_empty() || !subtype.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(err(format!("bad network subtype {subtype:?}")));
        }
        let text = net[colon + 1..].trim_start_matches(' ');
        let parsed = match subtype.parse::<NetworkKind>() {
            Ok(kind) => {
                let nick = if kind.names_actor() {
                    text.split_whitespace().next().unwrap_or("")
                } else {
                    ""
                };
                event(IrcEventKind::Network(kind), nick, text)
            }
            Err(()) => event(IrcEventKind::Unlisted(subtype.to_string()), "", text),
        };
        return Ok(ParsedLine::Event(parsed));
    }

    Err(err("expected <nick> or *** after timestamp".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Keep,
    Drop,
}

/// Optional extra subtypes to drop on top of the eight housekeeping kinds.
#[derive(Debug, Clone, Default)]
pub struct IrcFilter {
    pub extra_drop: Vec<String>,
}

/// Drops the eight housekeeping kinds, keeps everything else.
pub fn classify(event: &IrcEvent) -> Disposition {
    classify_with(event, &IrcFilter::default())
}

pub fn classify_with(event: &IrcEvent, filter: &IrcFilter) -> Disposition {
    match &event.kind {
        IrcEventKind::Network(_) => Disposition::Drop,
        IrcEventKind::Unlisted(sub)
            if filter.extra_drop.iter().any(|d| d.eq_ignore_ascii_case(sub)) =>
        {
            Disposition::Drop
        }
        _ => Disposition::Keep,
    }
}

/// Counts for one log file.
///
/// `lines == messages + dropped_network + dropped_other + out_of_window + unparsable + blank`
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines: u64,
    pub blank: u64,
    pub parsed: u64,
    pub messages: u64,
    pub dropped_network: u64,
    /// Unlisted subtypes dropped through [`IrcFilter::extra_drop`].
    pub dropped_other: u64,
    pub out_of_window: u64,
    pub unparsable: u64,
}

impl IngestStats {
    pub fn is_conserved(&self) -> bool {
        self.lines
            == self.messages
                + self.dropped_network
                + self.dropped_other
                + self.out_of_window
                + self.unparsable
                + self.blank
            && self.parsed
                == self.messages + self.dropped_network + self.dropped_other + self.out_of_window
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub context: LogContext,
    pub stream_id: String,
    /// Abort on the first unparsable line instead of counting it.
    pub strict: bool,
    pub window: CollectionWindow,
    pub filter: IrcFilter,
}

impl IngestOptions {
    pub fn new(context: LogContext) -> Self {
        Self {
            stream_id: irc_stream_id(&context.channel),
            context,
            strict: false,
            window: CollectionWindow::default(),
            filter: IrcFilter::default(),
        }
    }
}

fn event_to_message(event: IrcEvent, stream_id: &str) -> Message {
    let (author, text) = match event.kind {
        IrcEventKind::Unlisted(sub) => ("***".to_string(), format!("{sub}: {}", event.text)),
        _ => (event.nick, event.text),
    };
    let mut bytes = text.into_bytes();
    // Blanking only touches ASCII bytes, so the text stays valid UTF-8.
    sanitize_in_place(&mut bytes);
    let text = String::from_utf8(bytes).expect("sanitize keeps UTF-8 valid");
    Message::new(stream_id, event.timestamp, author, text)
}

/// Streams kept messages from `reader` into `sink`.
pub fn ingest_reader<R, F>(reader: R, opts: &IngestOptions, mut sink: F) -> Result<IngestStats, IrcError>
where
    R: BufRead,
    F: FnMut(Message) -> io::Result<()>,
{
    let mut stats = IngestStats::default();
    let mut reader = reader;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        stats.lines += 1;
        let line = String::from_utf8_lossy(&buf);
        match parse_log_line(&line, &opts.context, stats.lines) {
            Ok(ParsedLine::Blank) => stats.blank += 1,
            Ok(ParsedLine::Event(event)) => {
                stats.parsed += 1;
                if classify_with(&event, &opts.filter) == Disposition::Drop {
                    if matches!(event.kind, IrcEventKind::Network(_)) {
                        stats.dropped_network += 1;
                    } else {
                        stats.dropped_other += 1;
                    }
                } else if !opts.window.contains(event.timestamp) {
                    stats.out_of_window += 1;
                } else {
                    sink(event_to_message(event, &opts.stream_id))?;
                    stats.messages += 1;
                }
            }
            Err(e @ IrcError::UnparsableLine { .. }) => {
                if opts.strict {
                    return Err(e);
                }
                stats.unparsable += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(stats)
}

/// Reads a whole log file into memory-resident messages.
pub fn ingest_log(path: &Path, opts: &IngestOptions) -> Result<(Vec<Message>, IngestStats), IrcError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    let stats = ingest_reader(reader, opts, |m| {
        out.push(m);
        Ok(())
    })?;
    Ok((out, stats))
}
