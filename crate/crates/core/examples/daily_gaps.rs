// SPDX-License-Identifier: Apache-2.0

//! Buckets messages into UTC days and flags collection outages.
//!
//!     cargo run --example daily_gaps -- [THETA] [WINDOW]

use chrono::{Duration, TimeZone, Utc};
use coinchatter::series::{bucket_daily, detect_gaps, GapParams};
use coinchatter::Message;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let theta: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.1);
    let window: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    // steady ~400/day with a dead collector on day 9 and a crippled one on day 15
    let per_day = [400, 410, 395, 420, 405, 398, 402, 415, 0, 390, 401, 399, 412, 407, 20, 396];
    let start = Utc.with_ymd_and_hms(2015, 8, 20, 0, 0, 0).unwrap();
    let messages: Vec<Message> = per_day
        .iter()
        .enumerate()
        .flat_map(|(day, &n)| {
            (0..n).map(move |i| {
                let ts = start + Duration::days(day as i64) + Duration::seconds(i64::from(i) * 200);
                Message::new("twitter", ts, "u", "bitcoin")
            })
        })
        .collect();

    let series = bucket_daily(&messages, "twitter");
    let flagged = detect_gaps(&series, GapParams::new(theta, window)?);
    let mut out = Vec::new();
    flagged.write_csv(&mut out)?;
    print!("{}", String::from_utf8(out)?);
    println!("outages: {:?}", flagged.outage_days());
    Ok(())
}
