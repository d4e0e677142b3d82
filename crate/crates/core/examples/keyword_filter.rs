// SPDX-License-Identifier: Apache-2.0

//! Keyword matching over tweet text and hashtags.
//!
//!     cargo run --example keyword_filter -- [KEYWORD,...]

use coinchatter::twitter::KeywordMatcher;

fn main() {
    let keywords: Vec<String> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(str::to_string).collect())
        .unwrap_or_else(|| vec!["bitcoin".into(), "block size".into()]);
    let whole = KeywordMatcher::new(&keywords, false).expect("at least one keyword");
    let anywhere = KeywordMatcher::new(&keywords, true).expect("at least one keyword");

    let samples: [(&str, &[&str]); 7] = [
        ("BitCoin is up today", &[]),
        ("to the moon", &["Bitcoin"]),
        ("I like bit coin", &[]),
        ("bitcoins for sale", &[]),
        ("#BITCOIN!!", &[]),
        ("the Block  Size debate", &[]),
        ("unrelated chatter", &["crypto"]),
    ];
    println!("{:<28} {:<12} whole-word substring", "text", "hashtags");
    for (text, tags) in samples {
        let tags: Vec<String> = tags.iter().map(|t| t.to_lowercase()).collect();
        println!(
            "{:<28} {:<12} {:<10} {}",
            text,
            tags.join(","),
            whole.matches(text, &tags),
            anywhere.matches(text, &tags)
        );
    }
}
