// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashSet, VecDeque};
use std::io::{self, BufRead};
use std::time::Duration;

use super::backoff::{BackoffSchedule, BackoffState, FailureMode, Outcome};
use super::{parse_tweet, KeywordMatcher};
use crate::message::{CollectionWindow, Message};
use crate::sanitize::sanitize_in_place;

/// What a tweet source hands the collector next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceEvent {
    Record(String),
    /// The connection failed; the collector backs off and reconnects.
    Fault(FailureMode),
}

pub trait RecordSource {
    /// `Ok(None)` once the source is exhausted.
    fn next_event(&mut self) -> io::Result<Option<SourceEvent>>;
}

/// Replays a capture file, one record per non-blank line, without faults.
pub struct ReplaySource<R> {
    reader: R,
    buf: Vec<u8>,
}

impl<R: BufRead> ReplaySource<R> {
    pub fn new(reader: R) -> Self {
        Self {
            reader,
            buf: Vec::new(),
        }
    }
}

impl<R: BufRead> RecordSource for ReplaySource<R> {
    fn next_event(&mut self) -> io::Result<Option<SourceEvent>> {
        loop {
            self.buf.clear();
            if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(None);
            }
            let line = String::from_utf8_lossy(&self.buf);
            let line = line.trim_end_matches(['\n', '\r']);
            if !line.trim().is_empty() {
                return Ok(Some(SourceEvent::Record(line.to_string())));
            }
        }
    }
}

/// One token of a fault script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptStep {
    Ok,
    Fault(FailureMode),
}

/// Parses a fault script: one of `ok`, `drop`, `http`, `rate` per line.
/// Blank lines and `#` comments are ignored.
pub fn parse_fault_script(text: &str) -> Result<Vec<ScriptStep>, String> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, token)| match token {
            "ok" => Ok(ScriptStep::Ok),
            "drop" => Ok(ScriptStep::Fault(FailureMode::NetworkError)),
            "http" => Ok(ScriptStep::Fault(FailureMode::HttpError)),
            "rate" => Ok(ScriptStep::Fault(FailureMode::RateLimited)),
            other => Err(format!("fault script line {i}: unknown token {other:?}")),
        })
        .collect()
}

/// Simulated flaky stream: each `ok` step delivers the next record from an
/// inner source, each fault step fails the connection. Once the script is
/// used up the remaining records are delivered without faults.
pub struct ScriptedSource<S> {
    inner: S,
    script: Vec<ScriptStep>,
    pos: usize,
}

impl<S: RecordSource> ScriptedSource<S> {
    pub fn new(inner: S, script: Vec<ScriptStep>) -> Self {
        Self {
            inner,
            script,
            pos: 0,
        }
    }
}

impl<S: RecordSource> RecordSource for ScriptedSource<S> {
    fn next_event(&mut self) -> io::Result<Option<SourceEvent>> {
        let step = self.script.get(self.pos).copied();
        self.pos += 1;
        match step {
            Some(ScriptStep::Fault(mode)) => Ok(Some(SourceEvent::Fault(mode))),
            Some(ScriptStep::Ok) | None => self.inner.next_event(),
        }
    }
}

impl RecordSource for std::vec::IntoIter<SourceEvent> {
    fn next_event(&mut self) -> io::Result<Option<SourceEvent>> {
        Ok(self.next())
    }
}

pub trait Sleeper {
    fn sleep(&mut self, seconds: f64);
}

/// Records requested sleeps instead of sleeping.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    pub sleeps: Vec<f64>,
}

impl VirtualClock {
    pub fn elapsed(&self) -> f64 {
        self.sleeps.iter().sum()
    }
}

impl Sleeper for VirtualClock {
    fn sleep(&mut self, seconds: f64) {
        self.sleeps.push(seconds);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&mut self, seconds: f64) {
        std::thread::sleep(Duration::from_secs_f64(seconds));
    }
}

#[derive(Debug, Clone)]
pub struct CollectOptions {
    pub schedule: BackoffSchedule,
    /// Abort once this many consecutive failures have been backed off.
    pub max_failures: u32,
    pub matcher: KeywordMatcher,
    pub window: CollectionWindow,
    /// How many recent tweet ids to remember for duplicate suppression.
    pub dedupe_window: usize,
}

pub const DEFAULT_DEDUPE_WINDOW: usize = 1 << 18;

impl Default for CollectOptions {
    fn default() -> Self {
        Self {
            schedule: BackoffSchedule::default(),
            max_failures: 10,
            matcher: KeywordMatcher::default(),
            window: CollectionWindow::default(),
            dedupe_window: DEFAULT_DEDUPE_WINDOW,
        }
    }
}

/// Set of the most recent `cap` ids; older ids are forgotten so memory stays
/// flat on long captures. Reconnect replays repeat recent tweets only.
struct RecentIds {
    set: HashSet<u64>,
    order: VecDeque<u64>,
    cap: usize,
}

impl RecentIds {
    fn new(cap: usize) -> Self {
        Self {
            set: HashSet::new(),
            order: VecDeque::new(),
            cap: cap.max(1),
        }
    }

    /// False if `id` is already remembered.
    fn insert(&mut self, id: u64) -> bool {
        if !self.set.insert(id) {
            return false;
        }
        self.order.push_back(id);
        if self.order.len() > self.cap {
            if let Some(old) = self.order.pop_front() {
                self.set.remove(&old);
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CollectStats {
    /// Records delivered by the source, including malformed ones.
    pub received: u64,
    pub matched: u64,
    pub malformed: u64,
    pub duplicates: u64,
    pub out_of_window: u64,
    pub reconnects: u64,
    pub total_backoff_seconds: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CollectError {
    #[error("giving up after {failures} consecutive connection failures")]
    TooManyFailures { failures: u32, stats: CollectStats },
    #[error("collector I/O: {source}")]
    Io {
        #[source]
        source: io::Error,
        stats: CollectStats,
    },
}

impl CollectError {
    pub fn stats(&self) -> &CollectStats {
        match self {
            CollectError::TooManyFailures { stats, .. } | CollectError::Io { stats, .. } => stats,
        }
    }
}

/// Pulls records from `source`, reconnecting with backoff on faults, and
/// forwards keyword-matching tweets to `sink` as `twitter` messages.
/// Duplicate tweet ids are forwarded once.
pub fn collect<S, F, Z>(
    source: &mut S,
    mut sink: F,
    opts: &CollectOptions,
    sleeper: &mut Z,
) -> Result<CollectStats, CollectError>
where
    S: RecordSource + ?Sized,
    F: FnMut(Message) -> io::Result<()>,
    Z: Sleeper + ?Sized,
{
    let mut stats = CollectStats::default();
    let mut state = BackoffState::default();
    let mut seen = RecentIds::new(opts.dedupe_window);
    loop {
        let event = match source.next_event() {
            Ok(Some(e)) => e,
            Ok(None) => break,
            Err(source) => return Err(CollectError::Io { source, stats }),
        };
        match event {
            SourceEvent::Fault(mode) => {
                let (delay, next) = opts.schedule.next_delay(&state, Outcome::Failure(mode));
                state = next;
                stats.reconnects += 1;
                stats.total_backoff_seconds += delay;
                sleeper.sleep(delay);
                if state.consecutive_failures >= opts.max_failures {
                    return Err(CollectError::TooManyFailures {
                        failures: state.consecutive_failures,
                        stats,
                    });
                }
            }
            SourceEvent::Record(line) => {
                if state.consecutive_failures > 0 {
                    state = opts.schedule.next_delay(&state, Outcome::Success).1;
                }
                stats.received += 1;
                let mut bytes = line.into_bytes();
                sanitize_in_place(&mut bytes);
                let line = String::from_utf8(bytes).expect("sanitize keeps UTF-8 valid");
                let record = match parse_tweet(&line) {
                    Ok(r) => r,
                    Err(_) => {
                        stats.malformed += 1;
                        continue;
                    }
                };
                if !seen.insert(record.id) {
                    stats.duplicates += 1;
                    continue;
                }
                if !opts.window.contains(record.created_at) {
                    stats.out_of_window += 1;
                    continue;
                }
                if opts.matcher.matches_record(&record) {
                    stats.matched += 1;
                    if let Err(source) = sink(record.into_message()) {
                        return Err(CollectError::Io { source, stats });
                    }
                }
            }
        }
    }
    Ok(stats)
}
