// SPDX-License-Identifier: Apache-2.0

//! Full run over the bundled seven-day fixture: tweets and an IRC log in,
//! series, plots, annotations and the report table out.
//!
//!     cargo run --example end_to_end -- [OUT_DIR]

use std::path::PathBuf;

use coinchatter::cli::{run_pipeline_config, IrcConfig, PipelineConfig, TwitterConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("coinchatter-end-to-end"));

    let config = PipelineConfig {
        out_dir: out_dir.clone(),
        price: fixtures.join("price.csv"),
        volume: fixtures.join("volume.csv"),
        gazetteer: Some(fixtures.join("gazetteer.tsv")),
        format: Some("markdown".into()),
        exclude_outages: false,
        theta: 0.1,
        window: 7,
        from: None,
        until: None,
        write_messages: true,
        twitter: Some(TwitterConfig {
            path: fixtures.join("tweets.jsonl"),
            keywords: vec!["bitcoin".into()],
            substring: false,
            fault_script: None,
            jitter_seed: 7,
            max_failures: 10,
        }),
        irc: vec![IrcConfig {
            channel: "#bitcoin".into(),
            path: fixtures.join("bitcoin.log"),
            stream_id: None,
            strict: false,
            tz: None,
        }],
    };
    let status = run_pipeline_config(&config)?;
    println!("{status:?}; outputs in {}", out_dir.display());
    print!("{}", std::fs::read_to_string(out_dir.join("report.md"))?);
    Ok(())
}
