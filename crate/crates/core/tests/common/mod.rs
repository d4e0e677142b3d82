// SPDX-License-Identifier: Apache-2.0

//! Reference implementations and generators shared by the integration tests.
//! The oracles are written from the definitions, not from the library code.

#![allow(dead_code)]

use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn day(i: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 6, 1).unwrap() + Days::new(i)
}

/// Two-pass textbook Pearson.
pub fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Overlap by enumerating integer positions. A range `[s, e)` covers
/// positions `s..e`; a zero-width window at `p` probes position `p`, and a
/// zero-width span at `q` is hit when the window covers position `q`.
pub fn brute_overlap(s: usize, e: usize, ws: usize, we: usize) -> bool {
    if ws == we {
        return (s..e).any(|i| i == ws);
    }
    if s == e {
        return (ws..we).any(|i| i == s);
    }
    (s..e).any(|i| (ws..we).contains(&i))
}

/// Median of the values, mean of the middle pair for even counts.
pub fn median(values: &[u64]) -> f64 {
    let mut v = values.to_vec();
    v.sort();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// Outage flags by direct scan: zero days, and days below `theta` times the
/// median of the last `window` earlier non-outage counts.
pub fn gap_oracle(counts: &[u64], theta: f64, window: usize) -> Vec<bool> {
    let mut flags: Vec<bool> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        let earlier_ok: Vec<u64> = (0..i).filter(|&j| !flags[j]).map(|j| counts[j]).collect();
        let tail = &earlier_ok[earlier_ok.len().saturating_sub(window)..];
        let outage = c == 0 || (!tail.is_empty() && (c as f64) < theta * median(tail));
        flags.push(outage);
    }
    flags
}

pub fn esc(hex: &str) -> String {
    format!("{}u{}", '\\', hex)
}

/// A JSON-ish line mixing plain ASCII, UTF-8, ASCII and non-ASCII escapes,
/// surrogate pairs, escaped backslashes and truncated escapes.
pub fn random_line<R: Rng>(rng: &mut R) -> Vec<u8> {
    let pieces = rng.random_range(0..24);
    let mut s = String::from("{\"text\":\"");
    for _ in 0..pieces {
        match rng.random_range(0..10) {
            0 => s.push_str(&esc(&format!("{:04x}", rng.random_range(0x80u32..0xd800)))),
            1 => s.push_str(&esc(&format!("{:04X}", rng.random_range(0u32..0x80)))),
            2 => {
                s.push_str(&esc(&format!("{:04x}", rng.random_range(0xd800u32..0xdc00))));
                s.push_str(&esc(&format!("{:04x}", rng.random_range(0xdc00u32..0xe000))));
            }
            3 => s.push_str("\\\\"),
            4 => s.push_str(&format!("{}u{:x}", '\\', rng.random_range(0u32..0xfff))),
            5 => s.push_str("café ☕ ₿"),
            6 => s.push('\\'),
            _ => {
                let n = rng.random_range(1..12);
                for _ in 0..n {
                    s.push(rng.random_range(b' '..=b'~') as char);
                }
            }
        }
    }
    s.push_str("\"}");
    s.into_bytes()
}

/// Random tweet-like text with words, hashtags, mentions, URLs, punctuation,
/// multi-byte chars and assorted whitespace.
pub fn random_text<R: Rng>(rng: &mut R) -> String {
    const WORDS: [&str; 12] = [
        "bitcoin", "Bitcoin", "core", "coinbase", "to", "the", "moon", "BTC", "42", "x_y", "über", "比特币",
    ];
    const SEPS: [&str; 6] = [" ", "  ", "\t", "\n", " \u{a0}", ""];
    let n = rng.random_range(0..30);
    let mut s = String::new();
    for _ in 0..n {
        match rng.random_range(0..9) {
            0 => s.push('#'),
            1 => s.push('@'),
            2 => s.push_str("https://t.co/"),
            3 => s.push(['!', '.', ',', '?', '$', '€', '🚀'][rng.random_range(0..7)]),
            _ => {}
        }
        s.push_str(WORDS[rng.random_range(0..WORDS.len())]);
        s.push_str(SEPS[rng.random_range(0..SEPS.len())]);
    }
    s
}
