// SPDX-License-Identifier: Apache-2.0

mod common;

use std::io::BufRead;

use coinchatter::sanitize::{sanitize_line, sanitize_stream};
use common::{esc, random_line, rng};
use proptest::prelude::*;

fn has_escape_prefix(b: &[u8]) -> bool {
    b.windows(2).any(|w| w == b"\\u")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn length_preserved_and_idempotent(line in proptest::collection::vec(any::<u8>(), 0..200)) {
        let line: Vec<u8> = line.into_iter().filter(|&b| b != b'\n').collect();
        let once = sanitize_line(&line);
        prop_assert_eq!(once.bytes.len(), line.len());
        let twice = sanitize_line(&once.bytes);
        prop_assert_eq!(&twice.bytes, &once.bytes);
        prop_assert_eq!(twice.replacements, 0);
    }

    #[test]
    fn escape_free_lines_untouched(s in "[^\\\\\n]{0,200}") {
        let out = sanitize_line(s.as_bytes());
        prop_assert_eq!(out.bytes, s.as_bytes().to_vec());
        prop_assert_eq!(out.replacements, 0);
    }

    #[test]
    fn non_ascii_escape_blanked(cp in 0x80u32..0xd800, prefix in "[a-z ]{0,10}", suffix in "[a-z ]{0,10}") {
        let line = format!("{prefix}{}{suffix}", esc(&format!("{cp:04x}")));
        let out = sanitize_line(line.as_bytes());
        prop_assert_eq!(out.bytes, format!("{prefix}      {suffix}").into_bytes());
        prop_assert_eq!(out.replacements, 1);
    }

    #[test]
    fn ascii_escape_kept(cp in 0u32..0x80) {
        let line = esc(&format!("{cp:04x}"));
        prop_assert_eq!(sanitize_line(line.as_bytes()).bytes, line.into_bytes());
    }
}

#[test]
fn generated_lines() {
    let mut r = rng(3);
    for _ in 0..2000 {
        let line = random_line(&mut r);
        let out = sanitize_line(&line);
        assert_eq!(out.bytes.len(), line.len());
        assert_eq!(sanitize_line(&out.bytes).bytes, out.bytes);
        if !has_escape_prefix(&line) {
            assert_eq!(out.bytes, line);
        }
    }
}

#[test]
fn surrogate_pair_is_one_replacement_of_twelve_spaces() {
    let line = format!("a{}{}b", esc("d83d"), esc("de80"));
    let out = sanitize_line(line.as_bytes());
    assert_eq!(out.bytes, format!("a{}b", " ".repeat(12)).into_bytes());
}

#[test]
fn escaped_backslash_is_not_an_escape() {
    let line = format!("{}{}", '\\', esc("2026"));
    assert_eq!(sanitize_line(line.as_bytes()).bytes, line.as_bytes());
}

#[test]
fn downstream_json_safety_on_fixture() {
    let data = std::fs::read(common::fixture("e2e/tweets.jsonl")).unwrap();
    let mut cleaned = Vec::new();
    let stats = sanitize_stream(&data[..], &mut cleaned).unwrap();
    assert_eq!(stats.lines_in, stats.lines_out);
    assert!(stats.replacements >= 2);
    for (before, after) in data.lines().zip(cleaned.lines()) {
        let (before, after) = (before.unwrap(), after.unwrap());
        assert_eq!(before.len(), after.len());
        let parsed: serde_json::Value = serde_json::from_str(&after).unwrap();
        let orig: serde_json::Value = serde_json::from_str(&before).unwrap();
        assert_eq!(parsed["id"], orig["id"]);
        assert!(parsed["text"].as_str().unwrap().is_ascii());
    }
}

#[test]
fn stream_keeps_missing_final_newline() {
    let input = format!("x{}\nplain", esc("2026"));
    let mut out = Vec::new();
    let stats = sanitize_stream(input.as_bytes(), &mut out).unwrap();
    assert_eq!(out, b"x      \nplain");
    assert_eq!((stats.lines_in, stats.replacements), (2, 1));
}
