// SPDX-License-Identifier: Apache-2.0

//! Text rendering of correlation reports and figure-ready CSV series.

use std::io::Write;
use std::str::FromStr;

use crate::series::{align, AlignPolicy, DailySeries, MarketSeries, SeriesError, DATE_FORMAT};
use crate::stats::{Correlation, CorrelationReport};

pub const HEADER: [&str; 6] = [
    "Data Source",
    "Total Messages",
    "Bitcoin Volume Correlation",
    "Bitcoin Price Correlation",
    "n_days",
    "policy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Tsv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tsv" => Ok(TableFormat::Tsv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown table format {other:?} (tsv, markdown)")),
        }
    }
}

/// `twitter` → `Twitter`, `irc:#bitcoin` → `#bitcoin`.
pub fn display_name(stream_id: &str) -> String {
    if stream_id == crate::message::TWITTER_STREAM {
        return "Twitter".to_string();
    }
    stream_id.strip_prefix("irc:").unwrap_or(stream_id).to_string()
}

/// Four decimals; negative zero prints as `0.0000`.
pub fn format_r(r: f64) -> String {
    let s = format!("{r:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn cell(c: &Correlation) -> String {
    match c {
        Correlation::Defined { r, .. } => format_r(*r),
        Correlation::Undefined { reason, .. } => format!("n/a({reason})"),
    }
}

fn n_days(volume: &Correlation, price: &Correlation) -> String {
    let (v, p) = (volume.n_days(), price.n_days());
    if v == p {
        v.to_string()
    } else {
        format!("{v}/{p}")
    }
}

pub fn render_table(report: &CorrelationReport, format: TableFormat) -> String {
    let rows: Vec<[String; 6]> = report
        .rows
        .iter()
        .map(|r| {
            [
                display_name(&r.stream_id),
                r.total_messages.to_string(),
                cell(&r.r_volume),
                cell(&r.r_price),
                n_days(&r.r_volume, &r.r_price),
                r.policy.name().to_string(),
            ]
        })
        .collect();
    let mut out = String::new();
    match format {
        TableFormat::Tsv => {
            out.push_str(&HEADER.join("\t"));
            out.push('\n');
            for r in &rows {
                out.push_str(&r.join("\t"));
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            let line = |cells: &[&str]| format!("| {} |\n", cells.join(" | "));
            out.push_str(&line(&HEADER));
            out.push_str(&line(&["---"; 6]));
            for r in &rows {
                let cells: Vec<&str> = r.iter().map(String::as_str).collect();
                out.push_str(&line(&cells));
            }
        }
    }
    out
}

/// Writes `date,count,flag,metric_value` over the days both series share.
/// Returns the number of data rows.
pub fn emit_plot_series<W: Write>(
    daily: &DailySeries,
    market: &MarketSeries,
    mut out: W,
) -> Result<usize, SeriesError> {
    let joined = align(&daily.values(), market.values(), AlignPolicy::AllDays)?;
    writeln!(out, "date,count,flag,metric_value")?;
    for d in &joined.dates {
        let count = daily.count(*d).unwrap_or(0);
        let flag = daily.flag(*d).unwrap_or(crate::series::DayFlag::Ok);
        let value = market.values()[d];
        writeln!(out, "{},{count},{flag},{value}", d.format(DATE_FORMAT))?;
    }
    out.flush()?;
    Ok(joined.len())
}
