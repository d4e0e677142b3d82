// SPDX-License-Identifier: Apache-2.0

//! Correlates daily message counts with price and volume and prints the
//! result table in both formats.
//!
//!     cargo run --example correlate_table

use chrono::{Days, NaiveDate};
use coinchatter::report::{render_table, TableFormat};
use coinchatter::series::{DailySeries, MarketSeries, Metric};
use coinchatter::stats::{correlation_report, pearson, ReportPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let day0 = NaiveDate::from_ymd_opt(2015, 6, 1).unwrap();
    let day = |i: usize| day0 + Days::new(i as u64);

    let volume = [3.1e6, 5.2e6, 2.4e6, 5.9e6, 4.3e6, 6.6e6, 4.8e6, 5.0e6, 3.9e6, 4.4e6];
    let price = [222.9, 225.1, 225.8, 224.6, 229.9, 231.2, 230.1, 228.7, 229.5, 233.0];
    let tweets = [3100, 5050, 2500, 6000, 4200, 6700, 4700, 5100, 3800, 4500];
    let chat = [40, 38, 51, 44, 39, 47, 52, 45, 41, 50];
    let quiet = [3; 10];

    let market = |m, v: &[f64]| MarketSeries::new(m, v.iter().enumerate().map(|(i, x)| (day(i), *x)));
    let series = |id: &str, c: &[u64]| DailySeries::from_counts(id, c.iter().enumerate().map(|(i, n)| (day(i), *n)));

    let report = correlation_report(
        &[series("twitter", &tweets), series("irc:#bitcoin", &chat), series("irc:#dogecoin", &quiet)],
        &market(Metric::PriceUsd, &price)?,
        &market(Metric::VolumeUsd, &volume)?,
        ReportPolicy::AllDays,
    );
    print!("{}", render_table(&report, TableFormat::Tsv));
    println!();
    print!("{}", render_table(&report, TableFormat::Markdown));

    println!();
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 5.0])?;
    println!("pearson([1,2,3,4], [1,3,2,5]) = {r:.12} (5.5/sqrt(43.75) = {:.12})", 5.5 / 43.75f64.sqrt());
    Ok(())
}
