// SPDX-License-Identifier: Apache-2.0

//! Blanks non-ASCII `\uXXXX` escapes in JSON lines.
//!
//!     cargo run --example sanitize_pipe < tweets.jsonl > clean.jsonl
//!
//! With no stdin redirect (a terminal), runs on a built-in sample instead.

use std::io::{self, IsTerminal};

use coinchatter::sanitize::{sanitize_line, sanitize_stream};

fn main() -> io::Result<()> {
    if io::stdin().is_terminal() {
        let bs = '\\';
        let sample = format!(r#"{{"text":"to the moon {bs}u2026 {bs}ud83d{bs}ude80 {bs}u0041"}}"#);
        let out = sanitize_line(sample.as_bytes());
        println!("in:  {sample}");
        println!("out: {}", String::from_utf8_lossy(&out.bytes));
        println!("replacements={} malformed={}", out.replacements, out.malformed);
        return Ok(());
    }
    let stats = sanitize_stream(io::stdin().lock(), io::stdout().lock()).map_err(|(e, _)| e)?;
    eprint!("{}", stats.to_key_values());
    Ok(())
}
