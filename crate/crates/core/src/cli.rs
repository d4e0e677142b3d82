// SPDX-License-Identifier: Apache-2.0

//! Command-line driver.
//!
//! Exit codes: 0 success, 1 partial (skipped input lines or undefined
//! correlations), 2 fatal, 64 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate, TimeZone, Utc};
use chrono_tz::Tz;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::annotate::{run_pipeline, AnnotatedDocument, Document, Gazetteer, Pipeline, Resources};
use crate::irc::{self, IngestOptions, IrcFilter, LogContext};
use crate::message::{read_messages, CollectionWindow, Message, MessageWriter};
use crate::report::{emit_plot_series, render_table, TableFormat};
use crate::sanitize::sanitize_stream;
use crate::series::{detect_gaps, load_market_csv, DailyCounter, DailySeries, GapParams, Metric};
use crate::stats::{correlation_report, CorrelationReport, ReportPolicy};
use crate::twitter::{
    collect, parse_fault_script, BackoffSchedule, CollectError, CollectOptions, CollectStats,
    KeywordMatcher, RecordSource, ReplaySource, ScriptedSource, Sleeper, ThreadSleeper, VirtualClock,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_FATAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "coinchatter", version, about = "Cryptocurrency chatter volume vs. market metrics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Blank non-ASCII \uXXXX escapes in JSON-lines from stdin to stdout
    Sanitize {
        /// Print counters to stderr as key=value lines
        #[arg(long)]
        stats: bool,
    },
    /// Parse an IRC log into message JSON-lines
    ParseIrc(ParseIrcArgs),
    /// Filter a tweet capture by keyword into message JSON-lines
    IngestTweets(IngestTweetsArgs),
    /// Run the annotation pipeline over message JSON-lines
    Annotate(AnnotateArgs),
    /// Count messages per UTC day into a date,count,flag CSV
    Aggregate(AggregateArgs),
    /// Flag outage days in a daily series CSV
    Gaps(GapsArgs),
    /// Correlate daily series with price and volume into a JSON report
    Correlate(CorrelateArgs),
    /// Render a JSON report as a table
    Report(ReportArgs),
    /// Join a daily series with a market series into a plot-ready CSV
    PlotSeries(PlotSeriesArgs),
    /// Run every stage from a TOML or JSON config file
    RunAll {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// First UTC day to keep (YYYY-MM-DD)
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// Last UTC day to keep, inclusive (YYYY-MM-DD)
    #[arg(long)]
    pub until: Option<NaiveDate>,
}

impl WindowArgs {
    fn window(&self) -> CollectionWindow {
        collection_window(self.from, self.until)
    }
}

#[derive(Debug, Args)]
pub struct ParseIrcArgs {
    /// Channel name, with leading '#'
    #[arg(long)]
    pub channel: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Abort on the first unparsable line
    #[arg(long)]
    pub strict: bool,
    /// Time zone of the log's timestamps
    #[arg(long, default_value = "UTC")]
    pub tz: String,
    /// Stream id for the messages [default: irc:<channel>]
    #[arg(long)]
    pub stream_id: Option<String>,
    /// Also drop this `***` subtype (repeatable)
    #[arg(long = "drop-subtype")]
    pub drop_subtype: Vec<String>,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct IngestTweetsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated keywords
    #[arg(long, value_delimiter = ',', default_value = "bitcoin")]
    pub keywords: Vec<String>,
    /// Match keywords anywhere instead of as whole words
    #[arg(long)]
    pub substring: bool,
    /// Replay through a simulated flaky connection (ok/drop/http/rate per line)
    #[arg(long)]
    pub fault_script: Option<PathBuf>,
    /// Seed for backoff jitter
    #[arg(long, default_value_t = 0)]
    pub jitter_seed: u64,
    /// Give up after this many consecutive connection failures
    #[arg(long, default_value_t = 10)]
    pub max_failures: u32,
    /// Actually sleep during backoff instead of accounting it
    #[arg(long)]
    pub real_sleep: bool,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Message JSON-lines
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Gazetteer file: surface<TAB>major<TAB>minor
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated stages [default: tokenize,gazetteer,entity with a
    /// gazetteer, tokenize without]
    #[arg(long, value_delimiter = ',')]
    pub stages: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Message JSON-lines
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Only count this stream id
    #[arg(long)]
    pub stream: Option<String>,
}

#[derive(Debug, Args)]
pub struct GapsArgs {
    /// Daily series CSV
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Outage threshold as a fraction of the trailing median
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    /// Trailing window in days
    #[arg(long, default_value_t = 7)]
    pub window: usize,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Daily series CSV, as PATH or STREAM_ID=PATH (repeatable)
    #[arg(long = "series", required = true)]
    pub series: Vec<String>,
    /// Price CSV (date,value)
    #[arg(long)]
    pub price: PathBuf,
    /// Trading volume CSV (date,value)
    #[arg(long)]
    pub volume: PathBuf,
    /// Leave outage days out of the join
    #[arg(long)]
    pub exclude_outages: bool,
    /// Report JSON [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON from `correlate`
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub format: TableFormat,
    /// [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotSeriesArgs {
    /// Daily series CSV
    #[arg(long)]
    pub series: PathBuf,
    /// Market CSV (date,value)
    #[arg(long)]
    pub market: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Input(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

/// Non-fatal outcome of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    Partial,
}

impl Status {
    fn partial_if(cond: bool) -> Self {
        if cond {
            Status::Partial
        } else {
            Status::Success
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn run(config: &RunConfig) -> i32 {
    match execute(&config.command) {
        Ok(Status::Success) => EXIT_OK,
        Ok(Status::Partial) => EXIT_PARTIAL,
        Err(e) => {
            eprintln!("coinchatter: {e}");
            EXIT_FATAL
        }
    }
}

fn execute(command: &Command) -> Result<Status, CliError> {
    match command {
        Command::Sanitize { stats } => cmd_sanitize(*stats),
        Command::ParseIrc(a) => cmd_parse_irc(a),
        Command::IngestTweets(a) => cmd_ingest_tweets(a),
        Command::Annotate(a) => cmd_annotate(a),
        Command::Aggregate(a) => cmd_aggregate(a),
        Command::Gaps(a) => cmd_gaps(a),
        Command::Correlate(a) => cmd_correlate(a),
        Command::Report(a) => cmd_report(a),
        Command::PlotSeries(a) => cmd_plot_series(a),
        Command::RunAll { config } => cmd_run_all(config),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such input file", path.display())))
    }
}

fn collection_window(from: Option<NaiveDate>, until: Option<NaiveDate>) -> CollectionWindow {
    let midnight = |d: NaiveDate| Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).expect("midnight"));
    CollectionWindow {
        start: from.map(midnight),
        end: until.and_then(|d| d.checked_add_days(Days::new(1))).map(midnight),
    }
}

fn parse_tz(name: &str) -> Result<Tz, CliError> {
    name.parse::<Tz>()
        .map_err(|_| CliError::Input(format!("unknown time zone {name:?}")))
}

fn cmd_sanitize(print_stats: bool) -> Result<Status, CliError> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let out = BufWriter::new(stdout.lock());
    match sanitize_stream(stdin.lock(), out) {
        Ok(stats) => {
            if print_stats {
                eprint!("{}", stats.to_key_values());
            }
            Ok(Status::Success)
        }
        Err((source, stats)) => {
            if print_stats {
                eprint!("{}", stats.to_key_values());
            }
            Err(CliError::Io {
                path: PathBuf::from("<stdio>"),
                source,
            })
        }
    }
}

/// Per-stream destination: day counts plus optional message and annotation
/// outputs.
struct StreamSink {
    counter: DailyCounter,
    messages: Option<MessageWriter<BufWriter<File>>>,
    annotate: Option<(BufWriter<File>, Pipeline)>,
    resources: Resources,
    annotated: u64,
}

impl StreamSink {
    fn new() -> Self {
        Self {
            counter: DailyCounter::new(),
            messages: None,
            annotate: None,
            resources: Resources::default(),
            annotated: 0,
        }
    }

    fn accept(&mut self, m: Message) -> io::Result<()> {
        self.counter.add(m.ts);
        if let Some((out, pipeline)) = self.annotate.as_mut() {
            self.annotated += 1;
            let doc = Document::new(format!("{}/{}", m.stream_id, self.annotated), m.text.clone());
            let annotated = run_pipeline(&doc, pipeline, &self.resources)
                .map_err(|e| io::Error::other(e.to_string()))?;
            serde_json::to_writer(&mut *out, &annotated)?;
            out.write_all(b"\n")?;
        }
        if let Some(w) = self.messages.as_mut() {
            w.write(&m)?;
        }
        Ok(())
    }

    fn finish(self, stream_id: &str) -> io::Result<DailySeries> {
        if let Some(w) = self.messages {
            w.finish()?;
        }
        if let Some((mut out, _)) = self.annotate {
            out.flush()?;
        }
        Ok(self.counter.finish(stream_id))
    }
}

fn cmd_parse_irc(a: &ParseIrcArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let ctx = LogContext::new(&a.channel).map_err(input_err)?.with_tz(parse_tz(&a.tz)?);
    let mut opts = IngestOptions::new(ctx);
    if let Some(id) = &a.stream_id {
        opts.stream_id = id.clone();
    }
    opts.strict = a.strict;
    opts.window = a.window.window();
    opts.filter = IrcFilter {
        extra_drop: a.drop_subtype.clone(),
    };
    let mut writer = MessageWriter::new(create(&a.out)?);
    let stats = irc::ingest_reader(open(&a.input)?, &opts, |m| writer.write(&m)).map_err(|e| match e {
        irc::IrcError::Io(source) => CliError::Io {
            path: a.input.clone(),
            source,
        },
        other => input_err(other),
    })?;
    writer.finish().map_err(io_err(&a.out))?;
    eprintln!(
        "lines={} messages={} dropped_network={} dropped_other={} out_of_window={} unparsable={} blank={}",
        stats.lines,
        stats.messages,
        stats.dropped_network,
        stats.dropped_other,
        stats.out_of_window,
        stats.unparsable,
        stats.blank
    );
    Ok(Status::partial_if(stats.unparsable > 0))
}

struct TwitterJob<'a> {
    input: &'a Path,
    keywords: &'a [String],
    substring: bool,
    fault_script: Option<&'a Path>,
    jitter_seed: u64,
    max_failures: u32,
    real_sleep: bool,
    window: CollectionWindow,
}

fn run_twitter(job: &TwitterJob<'_>, sink: &mut StreamSink) -> Result<CollectStats, CliError> {
    require_file(job.input)?;
    let matcher = KeywordMatcher::new(job.keywords, job.substring)
        .ok_or_else(|| CliError::Input("no usable keywords".into()))?;
    let opts = CollectOptions {
        schedule: BackoffSchedule::default().with_seed(job.jitter_seed),
        max_failures: job.max_failures,
        matcher,
        window: job.window,
        ..CollectOptions::default()
    };
    let replay = ReplaySource::new(open(job.input)?);
    let mut source: Box<dyn RecordSource> = match job.fault_script {
        None => Box::new(replay),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            let script = parse_fault_script(&text).map_err(CliError::Input)?;
            Box::new(ScriptedSource::new(replay, script))
        }
    };
    let mut sleeper: Box<dyn Sleeper> = if job.real_sleep {
        Box::new(ThreadSleeper)
    } else {
        Box::new(VirtualClock::default())
    };
    collect(source.as_mut(), |m| sink.accept(m), &opts, sleeper.as_mut()).map_err(|e| match e {
        CollectError::Io { source, .. } => CliError::Io {
            path: job.input.to_path_buf(),
            source,
        },
        other => input_err(other),
    })
}

fn print_collect_stats(stats: &CollectStats) {
    eprintln!(
        "received={} matched={} malformed={} duplicates={} out_of_window={} reconnects={} total_backoff_seconds={}",
        stats.received,
        stats.matched,
        stats.malformed,
        stats.duplicates,
        stats.out_of_window,
        stats.reconnects,
        stats.total_backoff_seconds
    );
}

fn cmd_ingest_tweets(a: &IngestTweetsArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let mut sink = StreamSink::new();
    sink.messages = Some(MessageWriter::new(create(&a.out)?));
    let job = TwitterJob {
        input: &a.input,
        keywords: &a.keywords,
        substring: a.substring,
        fault_script: a.fault_script.as_deref(),
        jitter_seed: a.jitter_seed,
        max_failures: a.max_failures,
        real_sleep: a.real_sleep,
        window: a.window.window(),
    };
    let stats = run_twitter(&job, &mut sink)?;
    sink.finish(crate::message::TWITTER_STREAM).map_err(io_err(&a.out))?;
    print_collect_stats(&stats);
    Ok(Status::partial_if(stats.malformed > 0))
}

fn load_gazetteer(path: &Path) -> Result<Gazetteer, CliError> {
    Gazetteer::from_reader(open(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn annotation_setup(gazetteer: Option<&Path>, stages: Option<&[String]>) -> Result<(Pipeline, Resources), CliError> {
    let resources = match gazetteer {
        Some(p) => Resources::with_gazetteer(load_gazetteer(p)?),
        None => Resources::default(),
    };
    let pipeline = match (stages, gazetteer) {
        (Some(s), _) => Pipeline::new(s.iter().cloned()),
        (None, Some(_)) => Pipeline::standard(),
        (None, None) => Pipeline::new(["tokenize"]),
    };
    pipeline.resolve().map_err(input_err)?;
    Ok((pipeline, resources))
}

fn cmd_annotate(a: &AnnotateArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let (pipeline, resources) = annotation_setup(a.gazetteer.as_deref(), a.stages.as_deref())?;
    let mut out = create(&a.out)?;
    let mut bad = 0u64;
    for (i, line) in open(&a.input)?.lines().enumerate() {
        let line = line.map_err(io_err(&a.input))?;
        if line.trim().is_empty() {
            continue;
        }
        let message = match Message::from_json_line(&line) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("line {}: {e}", i + 1);
                bad += 1;
                continue;
            }
        };
        let doc = Document::from_message(format!("{}/{}", message.stream_id, i + 1), message);
        let annotated: AnnotatedDocument = run_pipeline(&doc, &pipeline, &resources).map_err(input_err)?;
        serde_json::to_writer(&mut out, &annotated).map_err(|e| io_err(&a.out)(e.into()))?;
        out.write_all(b"\n").map_err(io_err(&a.out))?;
    }
    out.flush().map_err(io_err(&a.out))?;
    Ok(Status::partial_if(bad > 0))
}

fn cmd_aggregate(a: &AggregateArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let mut counter = DailyCounter::new();
    let mut stream_id: Option<String> = a.stream.clone();
    let mut bad = 0u64;
    for m in read_messages(open(&a.input)?) {
        let m = match m {
            Ok(m) => m,
            Err(crate::message::ReadError::Io(e)) => return Err(io_err(&a.input)(e)),
            Err(e) => {
                eprintln!("{e}");
                bad += 1;
                continue;
            }
        };
        match &stream_id {
            Some(id) if *id == m.stream_id => {}
            Some(_) if a.stream.is_some() => continue,
            Some(id) => {
                return Err(CliError::Input(format!(
                    "input mixes streams {id:?} and {:?}; pass --stream",
                    m.stream_id
                )))
            }
            None => stream_id = Some(m.stream_id.clone()),
        }
        counter.add(m.ts);
    }
    let series = counter.finish(stream_id.unwrap_or_default());
    let out = create(&a.out)?;
    series.write_csv(out).map_err(io_err(&a.out))?;
    Ok(Status::partial_if(bad > 0))
}

fn read_series(id: &str, path: &Path) -> Result<DailySeries, CliError> {
    DailySeries::read_csv(id, open(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_gaps(a: &GapsArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let params = GapParams::new(a.theta, a.window).map_err(input_err)?;
    let series = detect_gaps(&read_series(&stem(&a.input), &a.input)?, params);
    for d in series.outage_days() {
        eprintln!("outage {d}");
    }
    series.write_csv(create(&a.out)?).map_err(io_err(&a.out))?;
    Ok(Status::Success)
}

fn load_market(path: &Path, metric: Metric) -> Result<crate::series::MarketSeries, CliError> {
    require_file(path)?;
    load_market_csv(path, metric).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_correlate(a: &CorrelateArgs) -> Result<Status, CliError> {
    let mut series = Vec::new();
    for spec in &a.series {
        let (id, path) = match spec.split_once('=') {
            Some((id, p)) => (id.to_string(), PathBuf::from(p)),
            None => (stem(Path::new(spec)), PathBuf::from(spec)),
        };
        require_file(&path)?;
        series.push(read_series(&id, &path)?);
    }
    let price = load_market(&a.price, Metric::PriceUsd)?;
    let volume = load_market(&a.volume, Metric::VolumeUsd)?;
    let policy = if a.exclude_outages {
        ReportPolicy::ExcludeOutages
    } else {
        ReportPolicy::AllDays
    };
    let report = correlation_report(&series, &price, &volume, policy);
    let json = report.to_json() + "\n";
    match &a.out {
        Some(p) => {
            let mut out = create(p)?;
            out.write_all(json.as_bytes()).and_then(|_| out.flush()).map_err(io_err(p))?;
        }
        None => print!("{json}"),
    }
    Ok(Status::partial_if(report.has_undefined()))
}

fn cmd_report(a: &ReportArgs) -> Result<Status, CliError> {
    require_file(&a.input)?;
    let text = fs::read_to_string(&a.input).map_err(io_err(&a.input))?;
    let report = CorrelationReport::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.input.display())))?;
    if report.rows.is_empty() {
        return Err(CliError::Input("report has no rows".into()));
    }
    let table = render_table(&report, a.format);
    match &a.out {
        Some(p) => {
            let mut out = create(p)?;
            out.write_all(table.as_bytes()).and_then(|_| out.flush()).map_err(io_err(p))?;
        }
        None => print!("{table}"),
    }
    Ok(Status::partial_if(report.has_undefined()))
}

fn cmd_plot_series(a: &PlotSeriesArgs) -> Result<Status, CliError> {
    require_file(&a.series)?;
    let series = read_series(&stem(&a.series), &a.series)?;
    let market = load_market(&a.market, Metric::VolumeUsd)?;
    let mut buf = Vec::new();
    emit_plot_series(&series, &market, &mut buf).map_err(input_err)?;
    fs::write(&a.out, buf).map_err(io_err(&a.out))?;
    Ok(Status::Success)
}

/// `run-all` configuration. Relative paths resolve against the config file's
/// directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub price: PathBuf,
    pub volume: PathBuf,
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub exclude_outages: bool,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    /// First UTC day to keep.
    #[serde(default, deserialize_with = "config_date")]
    pub from: Option<NaiveDate>,
    /// Last UTC day to keep, inclusive.
    #[serde(default, deserialize_with = "config_date")]
    pub until: Option<NaiveDate>,
    #[serde(default)]
    pub write_messages: bool,
    #[serde(default)]
    pub twitter: Option<TwitterConfig>,
    #[serde(default)]
    pub irc: Vec<IrcConfig>,
}

/// Accepts a bare TOML date as well as a `YYYY-MM-DD` string.
fn config_date<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Toml(toml::value::Datetime),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Toml(dt) => dt.to_string(),
    };
    text.parse::<NaiveDate>().map(Some).map_err(serde::de::Error::custom)
}

fn default_theta() -> f64 {
    GapParams::default().theta
}

fn default_window() -> usize {
    GapParams::default().window
}

fn default_keywords() -> Vec<String> {
    vec!["bitcoin".to_string()]
}

fn default_max_failures() -> u32 {
    CollectOptions::default().max_failures
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwitterConfig {
    pub path: PathBuf,
    #[serde(default = "default_keywords")]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub substring: bool,
    #[serde(default)]
    pub fault_script: Option<PathBuf>,
    #[serde(default)]
    pub jitter_seed: u64,
    #[serde(default = "default_max_failures")]
    pub max_failures: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrcConfig {
    pub channel: String,
    pub path: PathBuf,
    #[serde(default)]
    pub stream_id: Option<String>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub tz: Option<String>,
}

impl PipelineConfig {
    /// Reads JSON when the file ends in `.json`, TOML otherwise.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut config: PipelineConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        fix(&mut self.price);
        fix(&mut self.volume);
        if let Some(g) = self.gazetteer.as_mut() {
            fix(g);
        }
        if let Some(t) = self.twitter.as_mut() {
            fix(&mut t.path);
            if let Some(f) = t.fault_script.as_mut() {
                fix(f);
            }
        }
        for i in &mut self.irc {
            fix(&mut i.path);
        }
    }

    /// Checks every input path before any work starts.
    fn validate(&self) -> Result<(), CliError> {
        let mut inputs = vec![&self.price, &self.volume];
        inputs.extend(self.gazetteer.as_ref());
        if let Some(t) = &self.twitter {
            inputs.push(&t.path);
            inputs.extend(t.fault_script.as_ref());
        }
        inputs.extend(self.irc.iter().map(|i| &i.path));
        for p in inputs {
            require_file(p)?;
        }
        if self.twitter.is_none() && self.irc.is_empty() {
            return Err(CliError::Input("config lists no twitter or irc input".into()));
        }
        GapParams::new(self.theta, self.window).map_err(input_err)?;
        Ok(())
    }
}

/// File-name-safe form of a stream id.
pub fn file_stem_for(stream_id: &str) -> String {
    stream_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

struct StreamResult {
    series: DailySeries,
    partial: bool,
    summary: String,
}

fn cmd_run_all(config_path: &Path) -> Result<Status, CliError> {
    require_file(config_path)?;
    let config = PipelineConfig::load(config_path)?;
    config.validate()?;
    run_pipeline_config(&config)
}

fn stream_sink(config: &PipelineConfig, stream_id: &str, annotation: &Option<(Pipeline, Resources)>) -> Result<StreamSink, CliError> {
    let mut sink = StreamSink::new();
    let stem = file_stem_for(stream_id);
    if config.write_messages {
        let path = config.out_dir.join("messages").join(format!("{stem}.jsonl"));
        sink.messages = Some(MessageWriter::new(create(&path)?));
    }
    if let Some((pipeline, resources)) = annotation {
        let path = config.out_dir.join("annotated").join(format!("{stem}.jsonl"));
        sink.annotate = Some((create(&path)?, pipeline.clone()));
        sink.resources = resources.clone();
    }
    Ok(sink)
}

/// Runs every configured stream through ingest, optional annotation and
/// daily counting (one thread per stream), then gap detection, correlation
/// and rendering. Outputs land under `out_dir`.
pub fn run_pipeline_config(config: &PipelineConfig) -> Result<Status, CliError> {
    let format = match &config.format {
        Some(f) => f.parse::<TableFormat>().map_err(CliError::Input)?,
        None => TableFormat::Tsv,
    };
    let params = GapParams::new(config.theta, config.window).map_err(input_err)?;
    let window = collection_window(config.from, config.until);
    let annotation = match &config.gazetteer {
        Some(g) => Some(annotation_setup(Some(g), None)?),
        None => None,
    };
    let price = load_market(&config.price, Metric::PriceUsd)?;
    let volume = load_market(&config.volume, Metric::VolumeUsd)?;
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;

    let results: Vec<Result<StreamResult, CliError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        if let Some(t) = &config.twitter {
            let annotation = &annotation;
            handles.push(scope.spawn(move || -> Result<StreamResult, CliError> {
                let id = crate::message::TWITTER_STREAM;
                let mut sink = stream_sink(config, id, annotation)?;
                let job = TwitterJob {
                    input: &t.path,
                    keywords: &t.keywords,
                    substring: t.substring,
                    fault_script: t.fault_script.as_deref(),
                    jitter_seed: t.jitter_seed,
                    max_failures: t.max_failures,
                    real_sleep: false,
                    window,
                };
                let stats = run_twitter(&job, &mut sink)?;
                let series = sink.finish(id).map_err(io_err(&config.out_dir))?;
                Ok(StreamResult {
                    series,
                    partial: stats.malformed > 0,
                    summary: format!(
                        "{id}: received={} matched={} malformed={} duplicates={} reconnects={}",
                        stats.received, stats.matched, stats.malformed, stats.duplicates, stats.reconnects
                    ),
                })
            }));
        }
        for irc_cfg in &config.irc {
            let annotation = &annotation;
            handles.push(scope.spawn(move || -> Result<StreamResult, CliError> {
                let tz = parse_tz(irc_cfg.tz.as_deref().unwrap_or("UTC"))?;
                let ctx = LogContext::new(&irc_cfg.channel).map_err(input_err)?.with_tz(tz);
                let mut opts = IngestOptions::new(ctx);
                if let Some(id) = &irc_cfg.stream_id {
                    opts.stream_id = id.clone();
                }
                opts.strict = irc_cfg.strict;
                opts.window = window;
                let id = opts.stream_id.clone();
                let mut sink = stream_sink(config, &id, annotation)?;
                let stats = irc::ingest_reader(open(&irc_cfg.path)?, &opts, |m| sink.accept(m))
                    .map_err(|e| CliError::Input(format!("{}: {e}", irc_cfg.path.display())))?;
                let series = sink.finish(&id).map_err(io_err(&config.out_dir))?;
                Ok(StreamResult {
                    series,
                    partial: stats.unparsable > 0,
                    summary: format!(
                        "{id}: lines={} messages={} dropped_network={} unparsable={}",
                        stats.lines, stats.messages, stats.dropped_network, stats.unparsable
                    ),
                })
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Input("stream worker panicked".into()))))
            .collect()
    });

    let mut status = Status::Success;
    let mut all_series = Vec::new();
    for r in results {
        let r = r?;
        eprintln!("{}", r.summary);
        if r.partial {
            status = Status::Partial;
        }
        all_series.push(detect_gaps(&r.series, params));
    }

    let series_dir = config.out_dir.join("series");
    let plot_dir = config.out_dir.join("plots");
    for s in &all_series {
        let stem = file_stem_for(&s.stream_id);
        let path = series_dir.join(format!("{stem}.csv"));
        s.write_csv(create(&path)?).map_err(io_err(&path))?;
        for (market, suffix) in [(&volume, "volume"), (&price, "price")] {
            let path = plot_dir.join(format!("{stem}_{suffix}.csv"));
            let mut buf = Vec::new();
            match emit_plot_series(s, market, &mut buf) {
                Ok(_) => {
                    create(&path)?
                        .write_all(&buf)
                        .map_err(io_err(&path))?;
                }
                Err(e) => {
                    eprintln!("{}: no plot series vs {suffix}: {e}", s.stream_id);
                    status = Status::Partial;
                }
            }
        }
    }

    let policy = if config.exclude_outages {
        ReportPolicy::ExcludeOutages
    } else {
        ReportPolicy::AllDays
    };
    let report = correlation_report(&all_series, &price, &volume, policy);
    let json_path = config.out_dir.join("report.json");
    fs::write(&json_path, report.to_json() + "\n").map_err(io_err(&json_path))?;
    let (name, table) = match format {
        TableFormat::Tsv => ("report.tsv", render_table(&report, format)),
        TableFormat::Markdown => ("report.md", render_table(&report, format)),
    };
    let table_path = config.out_dir.join(name);
    fs::write(&table_path, table).map_err(io_err(&table_path))?;
    if report.has_undefined() {
        status = Status::Partial;
    }
    Ok(status)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero() {
        assert_eq!(main_with_args(["coinchatter", "--help"]), EXIT_OK);
        assert_eq!(main_with_args(["coinchatter", "parse-irc", "--help"]), EXIT_OK);
    }

    #[test]
    fn usage_errors_exit_64() {
        assert_eq!(main_with_args(["coinchatter"]), EXIT_USAGE);
        assert_eq!(main_with_args(["coinchatter", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_with_args(["coinchatter", "parse-irc", "--channel", "#x"]), EXIT_USAGE);
        assert_eq!(main_with_args(["coinchatter", "report", "--in", "x", "--format", "html"]), EXIT_USAGE);
    }

    #[test]
    fn missing_input_is_fatal() {
        assert_eq!(
            main_with_args(["coinchatter", "aggregate", "--in", "/nonexistent/m.jsonl", "--out", "/tmp/x.csv"]),
            EXIT_FATAL
        );
    }

    #[test]
    fn config_dates() {
        let base = "out_dir = 'o'\nprice = 'p'\nvolume = 'v'\n";
        let c: PipelineConfig = toml::from_str(&format!("{base}from = 2015-06-02\nuntil = '2015-06-06'")).unwrap();
        assert_eq!(c.from, NaiveDate::from_ymd_opt(2015, 6, 2));
        assert_eq!(c.until, NaiveDate::from_ymd_opt(2015, 6, 6));
        assert!(toml::from_str::<PipelineConfig>(&format!("{base}from = 2015-06-02T10:00:00")).is_err());
        let j: PipelineConfig =
            serde_json::from_str(r#"{"out_dir":"o","price":"p","volume":"v","from":"2015-06-02"}"#).unwrap();
        assert_eq!(j.from, NaiveDate::from_ymd_opt(2015, 6, 2));
        assert_eq!(j.until, None);
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem_for("irc:#bitcoin-otc"), "irc__bitcoin-otc");
        assert_eq!(file_stem_for("twitter"), "twitter");
    }

    #[test]
    fn window_until_is_inclusive() {
        let w = collection_window(None, NaiveDate::from_ymd_opt(2015, 6, 1));
        assert!(w.contains(Utc.with_ymd_and_hms(2015, 6, 1, 23, 59, 59).unwrap()));
        assert!(!w.contains(Utc.with_ymd_and_hms(2015, 6, 2, 0, 0, 0).unwrap()));
    }
}
