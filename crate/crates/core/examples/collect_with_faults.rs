// SPDX-License-Identifier: Apache-2.0

//! Replays a tweet capture through a scripted flaky connection. Backoff is
//! accounted on a virtual clock, so nothing actually sleeps.
//!
//!     cargo run --example collect_with_faults -- [TWEETS.jsonl] [SEED]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use coinchatter::twitter::{
    collect, parse_fault_script, BackoffSchedule, CollectOptions, ReplaySource, ScriptedSource, VirtualClock,
};

const SCRIPT: &str = "\
ok
ok
drop       # connection reset
ok
http       # 503 from the stream endpoint
http
ok
rate       # 420 enhance your calm
ok
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e/tweets.jsonl"));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let replay = ReplaySource::new(BufReader::new(File::open(&path)?));
    let mut source = ScriptedSource::new(replay, parse_fault_script(SCRIPT)?);
    let opts = CollectOptions {
        schedule: BackoffSchedule::default().with_seed(seed),
        ..CollectOptions::default()
    };
    let mut clock = VirtualClock::default();
    let mut kept = Vec::new();
    let stats = collect(
        &mut source,
        |m| {
            kept.push(m);
            Ok(())
        },
        &opts,
        &mut clock,
    )?;
    for m in kept.iter().take(5) {
        println!("{}", m.to_json_line());
    }
    println!("... {} messages kept", kept.len());
    println!("{stats:#?}");
    println!("virtual sleeps: {:?}", clock.sleeps);
    Ok(())
}
