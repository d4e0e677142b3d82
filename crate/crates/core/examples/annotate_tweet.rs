// SPDX-License-Identifier: Apache-2.0

//! Runs the tokenizer, gazetteer and entity stages over one text and prints
//! the stand-off annotations.
//!
//!     cargo run --example annotate_tweet -- "some tweet text"

use coinchatter::annotate::{run_pipeline, Document, Gazetteer, Pipeline, Resources, ENTITY};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "RT @coinbase: Bitcoin Core 0.11 is out! #bitcoin https://bitcoin.org/en/".to_string());
    let gazetteer = Gazetteer::from_reader(
        "bitcoin\tcurrency\tcrypto\n\
         bitcoin core\tsoftware\tclient\n\
         coinbase\torganization\texchange\n"
            .as_bytes(),
    )?;

    let doc = run_pipeline(
        &Document::new("example", text),
        &Pipeline::standard(),
        &Resources::with_gazetteer(gazetteer),
    )?;
    for a in doc.annotations() {
        println!(
            "{:>3} {:<8} {:>3}..{:<3} {:<24} {:?}",
            a.id,
            a.kind,
            a.start,
            a.end,
            format!("{:?}", doc.covered_text(a)),
            a.features
        );
    }

    // everything overlapping the first entity
    if let Some(e) = doc.of_type(ENTITY).first() {
        let around: Vec<&str> = doc
            .annotations_in(None, e.span())
            .iter()
            .map(|a| a.kind.as_str())
            .collect();
        println!("overlapping {:?}: {around:?}", doc.covered_text(e));
    }
    println!("{}", doc.to_json());
    Ok(())
}
