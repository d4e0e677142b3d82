// SPDX-License-Identifier: Apache-2.0

//! Daily message counts, outage flags and market metric series.
//!
//! Days are UTC calendar dates. A [`DailySeries`] spans its first to last
//! observed day; missing days inside that span are stored as zero counts so
//! collection gaps stay visible.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};

use crate::message::Message;

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, thiserror::Error)]
pub enum SeriesError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("negative value on {0}")]
    NegativeValue(NaiveDate),
    #[error("only {0} overlapping days; at least 3 are needed")]
    EmptyOverlap(usize),
    #[error("invalid gap parameters: {0}")]
    InvalidGapParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SeriesError {
    /// Short variant name, used in report cells.
    pub fn name(&self) -> &'static str {
        match self {
            SeriesError::MalformedRow { .. } => "MalformedRow",
            SeriesError::DuplicateDate(_) => "DuplicateDate",
            SeriesError::NegativeValue(_) => "NegativeValue",
            SeriesError::EmptyOverlap(_) => "EmptyOverlap",
            SeriesError::InvalidGapParams(_) => "InvalidGapParams",
            SeriesError::Io(_) => "Io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayFlag {
    Ok,
    Outage,
}

impl fmt::Display for DayFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DayFlag::Ok => "ok",
            DayFlag::Outage => "outage",
        })
    }
}

impl FromStr for DayFlag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "ok" => Ok(DayFlag::Ok),
            "outage" => Ok(DayFlag::Outage),
            other => Err(format!("unknown flag {other:?}")),
        }
    }
}

/// Per-day message counts of one stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailySeries {
    pub stream_id: String,
    counts: BTreeMap<NaiveDate, u64>,
    flags: BTreeMap<NaiveDate, DayFlag>,
}

impl DailySeries {
    pub fn empty(stream_id: impl Into<String>) -> Self {
        Self {
            stream_id: stream_id.into(),
            counts: BTreeMap::new(),
            flags: BTreeMap::new(),
        }
    }

    /// Builds a series from sparse counts, filling interior days with zero.
    /// Repeated dates are summed. All flags start `Ok`.
    pub fn from_counts(
        stream_id: impl Into<String>,
        counts: impl IntoIterator<Item = (NaiveDate, u64)>,
    ) -> Self {
        let mut sparse: BTreeMap<NaiveDate, u64> = BTreeMap::new();
        for (d, c) in counts {
            *sparse.entry(d).or_default() += c;
        }
        let mut series = Self::empty(stream_id);
        let (Some(&first), Some(&last)) = (sparse.keys().next(), sparse.keys().next_back()) else {
            return series;
        };
        for day in first.iter_days().take_while(|d| *d <= last) {
            series.counts.insert(day, sparse.get(&day).copied().unwrap_or(0));
            series.flags.insert(day, DayFlag::Ok);
        }
        series
    }

    pub fn counts(&self) -> &BTreeMap<NaiveDate, u64> {
        &self.counts
    }

    pub fn flags(&self) -> &BTreeMap<NaiveDate, DayFlag> {
        &self.flags
    }

    pub fn count(&self, date: NaiveDate) -> Option<u64> {
        self.counts.get(&date).copied()
    }

    pub fn flag(&self, date: NaiveDate) -> Option<DayFlag> {
        self.flags.get(&date).copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn outage_days(&self) -> Vec<NaiveDate> {
        self.flags
            .iter()
            .filter(|(_, f)| **f == DayFlag::Outage)
            .map(|(d, _)| *d)
            .collect()
    }

    /// Counts as reals, for joining with market data.
    pub fn values(&self) -> BTreeMap<NaiveDate, f64> {
        self.counts.iter().map(|(d, c)| (*d, *c as f64)).collect()
    }

    /// `date,count,flag` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "date,count,flag")?;
        for (d, c) in &self.counts {
            let flag = self.flags.get(d).copied().unwrap_or(DayFlag::Ok);
            writeln!(out, "{},{c},{flag}", d.format(DATE_FORMAT))?;
        }
        out.flush()
    }

    /// Reads a `date,count,flag` CSV. Interior days missing from the file
    /// are filled with zero and flagged `Ok`.
    pub fn read_csv<R: Read>(stream_id: impl Into<String>, input: R) -> Result<Self, SeriesError> {
        let mut rows = Vec::new();
        let mut flags = BTreeMap::new();
        for_each_row(input, &["date", "count", "flag"], |line, fields| {
            let date = parse_date(fields[0], line)?;
            let count: u64 = fields[1].parse().map_err(|_| SeriesError::MalformedRow {
                line,
                reason: format!("bad count {:?}", fields[1]),
            })?;
            let flag: DayFlag = fields[2]
                .parse()
                .map_err(|reason| SeriesError::MalformedRow { line, reason })?;
            if flags.insert(date, flag).is_some() {
                return Err(SeriesError::DuplicateDate(date));
            }
            rows.push((date, count));
            Ok(())
        })?;
        let mut series = Self::from_counts(stream_id, rows);
        for (d, f) in flags {
            series.flags.insert(d, f);
        }
        Ok(series)
    }
}

/// Streaming day counter; memory grows with the number of distinct days.
#[derive(Debug, Clone, Default)]
pub struct DailyCounter {
    counts: BTreeMap<NaiveDate, u64>,
    seen: u64,
}

impl DailyCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, ts: DateTime<Utc>) {
        *self.counts.entry(ts.date_naive()).or_default() += 1;
        self.seen += 1;
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn finish(self, stream_id: impl Into<String>) -> DailySeries {
        DailySeries::from_counts(stream_id, self.counts)
    }
}

/// Counts messages per UTC day.
pub fn bucket_daily<I>(messages: I, stream_id: &str) -> DailySeries
where
    I: IntoIterator,
    I::Item: Borrow<Message>,
{
    let mut counter = DailyCounter::new();
    for m in messages {
        counter.add(m.borrow().ts);
    }
    counter.finish(stream_id)
}

/// Outage detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapParams {
    /// Fraction of the trailing median below which a day is an outage.
    pub theta: f64,
    /// Number of trailing non-outage days forming the median.
    pub window: usize,
}

impl Default for GapParams {
    fn default() -> Self {
        Self {
            theta: 0.1,
            window: 7,
        }
    }
}

impl GapParams {
    pub fn new(theta: f64, window: usize) -> Result<Self, SeriesError> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(SeriesError::InvalidGapParams(format!("theta {theta} not in (0, 1)")));
        }
        if window == 0 {
            return Err(SeriesError::InvalidGapParams("window must be >= 1".into()));
        }
        Ok(Self { theta, window })
    }
}

fn median(values: &mut [u64]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
    }
}

/// Flags a day `Outage` when its count is zero, or below `theta` times the
/// median of the `window` most recent earlier days that are not themselves
/// outages. Early days use whatever history exists. Replaces all flags.
pub fn detect_gaps(series: &DailySeries, params: GapParams) -> DailySeries {
    let mut out = series.clone();
    let mut history: Vec<u64> = Vec::new();
    for (day, &count) in &series.counts {
        let outage = count == 0 || {
            let start = history.len().saturating_sub(params.window);
            let mut recent = history[start..].to_vec();
            !recent.is_empty() && (count as f64) < params.theta * median(&mut recent)
        };
        if outage {
            out.flags.insert(*day, DayFlag::Outage);
        } else {
            out.flags.insert(*day, DayFlag::Ok);
            history.push(count);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    PriceUsd,
    VolumeUsd,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::PriceUsd => "price_usd",
            Metric::VolumeUsd => "volume_usd",
        })
    }
}

/// Daily values of one market metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSeries {
    pub metric: Metric,
    values: BTreeMap<NaiveDate, f64>,
}

impl MarketSeries {
    /// Rejects negative or non-finite values.
    pub fn new(
        metric: Metric,
        values: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Result<Self, SeriesError> {
        let mut map = BTreeMap::new();
        for (d, v) in values {
            if !v.is_finite() {
                return Err(SeriesError::MalformedRow {
                    line: 0,
                    reason: format!("non-finite value on {d}"),
                });
            }
            if v < 0.0 {
                return Err(SeriesError::NegativeValue(d));
            }
            if map.insert(d, v).is_some() {
                return Err(SeriesError::DuplicateDate(d));
            }
        }
        Ok(Self { metric, values: map })
    }

    pub fn values(&self) -> &BTreeMap<NaiveDate, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn from_csv<R: Read>(metric: Metric, input: R) -> Result<Self, SeriesError> {
        let mut values = BTreeMap::new();
        for_each_row(input, &["date", "value"], |line, fields| {
            let date = parse_date(fields[0], line)?;
            let value: f64 = fields[1]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| SeriesError::MalformedRow {
                    line,
                    reason: format!("bad value {:?}", fields[1]),
                })?;
            if value < 0.0 {
                return Err(SeriesError::NegativeValue(date));
            }
            if values.insert(date, value).is_some() {
                return Err(SeriesError::DuplicateDate(date));
            }
            Ok(())
        })?;
        Ok(Self { metric, values })
    }
}

/// Loads a `date,value` CSV.
pub fn load_market_csv(path: &Path, metric: Metric) -> Result<MarketSeries, SeriesError> {
    MarketSeries::from_csv(metric, std::fs::File::open(path)?)
}

fn parse_date(field: &str, line: u64) -> Result<NaiveDate, SeriesError> {
    NaiveDate::parse_from_str(field, DATE_FORMAT).map_err(|_| SeriesError::MalformedRow {
        line,
        reason: format!("bad date {field:?}"),
    })
}

/// Runs `row` on every data record of a CSV with the given header.
fn for_each_row<R, F>(input: R, header: &[&str], mut row: F) -> Result<(), SeriesError>
where
    R: Read,
    F: FnMut(u64, &[&str]) -> Result<(), SeriesError>,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let found = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    if found.iter().map(str::to_ascii_lowercase).ne(header.iter().map(|h| h.to_string())) {
        return Err(SeriesError::MalformedRow {
            line: 1,
            reason: format!("expected header {:?}", header.join(",")),
        });
    }
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| csv_error(e, 0))?;
        if !more {
            return Ok(());
        }
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        if fields.len() != header.len() {
            return Err(SeriesError::MalformedRow {
                line,
                reason: format!("expected {} fields, got {}", header.len(), fields.len()),
            });
        }
        row(line, &fields)?;
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> SeriesError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SeriesError::Io(io),
        other => SeriesError::MalformedRow {
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Which days take part in a join.
#[derive(Debug, Clone, Copy)]
pub enum AlignPolicy<'a> {
    AllDays,
    ExcludeOutages(&'a BTreeMap<NaiveDate, DayFlag>),
}

impl AlignPolicy<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            AlignPolicy::AllDays => "all-days",
            AlignPolicy::ExcludeOutages(_) => "exclude-outages",
        }
    }
}

/// Date-ascending paired observations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aligned {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dates: Vec<NaiveDate>,
}

impl Aligned {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Minimum number of joined days for a correlation.
pub const MIN_OVERLAP: usize = 3;

/// Inner join of two date-keyed series.
pub fn align(
    a: &BTreeMap<NaiveDate, f64>,
    b: &BTreeMap<NaiveDate, f64>,
    policy: AlignPolicy<'_>,
) -> Result<Aligned, SeriesError> {
    let mut out = Aligned::default();
    for (d, x) in a {
        let Some(y) = b.get(d) else { continue };
        if let AlignPolicy::ExcludeOutages(flags) = policy {
            if flags.get(d) == Some(&DayFlag::Outage) {
                continue;
            }
        }
        out.x.push(*x);
        out.y.push(*y);
        out.dates.push(*d);
    }
    if out.len() < MIN_OVERLAP {
        return Err(SeriesError::EmptyOverlap(out.len()));
    }
    Ok(out)
}
