// SPDX-License-Identifier: Apache-2.0

//! Parses an IRC log, drops network housekeeping lines and prints the chat
//! messages as JSON lines.
//!
//!     cargo run --example parse_irc_log -- [LOG] [CHANNEL] [TZ]

use std::path::PathBuf;

use coinchatter::irc::{ingest_log, IngestOptions, LogContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bitcoin_channel.log"));
    let channel = args.next().unwrap_or_else(|| "#bitcoin".to_string());
    let tz: chrono_tz::Tz = args.next().as_deref().unwrap_or("UTC").parse()?;

    let opts = IngestOptions::new(LogContext::new(channel)?.with_tz(tz));
    let (messages, stats) = ingest_log(&path, &opts)?;
    for m in &messages {
        println!("{}", m.to_json_line());
    }
    eprintln!("{stats:?}");
    assert!(stats.is_conserved());
    Ok(())
}
