// SPDX-License-Identifier: Apache-2.0

//! Byte-length preserving cleanup of `\uXXXX` escapes in JSON-lines input.
//!
//! Non-ASCII escapes (code point `>= 0x80`) are blanked with six spaces so the
//! record keeps its original byte length. ASCII escapes, other JSON escapes and
//! every other byte pass through untouched. A backslash that is itself escaped
//! (`\\u2026`) does not start an escape.

use std::io::{self, BufRead, Write};
use std::ops::AddAssign;

const ESCAPE_LEN: usize = 6;
const BLANK: [u8; ESCAPE_LEN] = [b' '; ESCAPE_LEN];

/// Counters for one sanitize run. Mergeable with `+=`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SanitizeStats {
    pub lines_in: u64,
    pub lines_out: u64,
    pub replacements: u64,
    pub malformed_escapes: u64,
}

impl AddAssign for SanitizeStats {
    fn add_assign(&mut self, other: Self) {
        self.lines_in += other.lines_in;
        self.lines_out += other.lines_out;
        self.replacements += other.replacements;
        self.malformed_escapes += other.malformed_escapes;
    }
}

impl SanitizeStats {
    /// `key=value` lines, as printed by `sanitize --stats`.
    pub fn to_key_values(&self) -> String {
        format!(
            "lines_in={}\nlines_out={}\nreplacements={}\nmalformed_escapes={}\n",
            self.lines_in, self.lines_out, self.replacements, self.malformed_escapes
        )
    }
}

/// Result of cleaning a single line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanitizedLine {
    pub bytes: Vec<u8>,
    pub replacements: u64,
    pub malformed: u64,
}

fn hex_value(b: u8) -> Option<u32> {
    (b as char).to_digit(16)
}

/// Cleans one record (without its trailing newline).
pub fn sanitize_line(line: &[u8]) -> SanitizedLine {
    let mut out = line.to_vec();
    let (replacements, malformed) = sanitize_in_place(&mut out);
    SanitizedLine {
        bytes: out,
        replacements,
        malformed,
    }
}

/// In-place variant of [`sanitize_line`]; returns `(replacements, malformed)`.
pub fn sanitize_in_place(buf: &mut [u8]) -> (u64, u64) {
    let mut replacements = 0;
    let mut malformed = 0;
    let mut i = 0;
    while i < buf.len() {
        if buf[i] != b'\\' {
            i += 1;
            continue;
        }
        match buf.get(i + 1) {
            Some(b'u') => {
                let digits = buf[i + 2..]
                    .iter()
                    .take(4)
                    .take_while(|b| b.is_ascii_hexdigit())
                    .count();
                if digits < 4 {
                    malformed += 1;
                    i += 2 + digits;
                    continue;
                }
                let code = buf[i + 2..i + ESCAPE_LEN]
                    .iter()
                    .fold(0u32, |acc, &b| acc * 16 + hex_value(b).unwrap_or(0));
                if code >= 0x80 {
                    buf[i..i + ESCAPE_LEN].copy_from_slice(&BLANK);
                    replacements += 1;
                }
                i += ESCAPE_LEN;
            }
            // `\\`, `\"`, `\n` ... : the escaped byte is consumed with the backslash.
            Some(_) => i += 2,
            None => i += 1,
        }
    }
    (replacements, malformed)
}

/// Reads newline-delimited records from `input`, cleans each one and writes it
/// to `output` in order. A final record without a newline is written without
/// one. On I/O failure the error is returned together with the counters for
/// the lines completed so far.
pub fn sanitize_stream<R: BufRead, W: Write>(
    mut input: R,
    mut output: W,
) -> Result<SanitizeStats, (io::Error, SanitizeStats)> {
    let mut stats = SanitizeStats::default();
    let mut buf = Vec::with_capacity(4096);
    loop {
        buf.clear();
        let n = match input.read_until(b'\n', &mut buf) {
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err((e, stats)),
        };
        if n == 0 {
            break;
        }
        stats.lines_in += 1;
        let body_len = if buf.last() == Some(&b'\n') {
            buf.len() - 1
        } else {
            buf.len()
        };
        let (replacements, malformed) = sanitize_in_place(&mut buf[..body_len]);
        if let Err(e) = output.write_all(&buf) {
            return Err((e, stats));
        }
        stats.lines_out += 1;
        stats.replacements += replacements;
        stats.malformed_escapes += malformed;
    }
    output.flush().map_err(|e| (e, stats))?;
    Ok(stats)
}
