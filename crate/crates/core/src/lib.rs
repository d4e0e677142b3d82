// SPDX-License-Identifier: Apache-2.0

//! Text mining over cryptocurrency chatter.
//!
//! `coinchatter` turns raw social-media captures (tweet JSON-lines and IRC
//! client logs) into normalized [`Message`] records, annotates them with a
//! small stand-off annotation pipeline, buckets them into per-day message
//! counts, flags collection outages, and correlates daily volume with
//! Bitcoin price and exchange trading volume.
//!
//! The stages are usable on their own:
//!
//! | stage | module |
//! |-------|--------|
//! | escape cleanup of raw JSON-lines | [`sanitize`] |
//! | IRC log parsing and network-message filtering | [`irc`] |
//! | tweet parsing, keyword filter, reconnect backoff | [`twitter`] |
//! | tokenizer, gazetteer, entity spans | [`annotate`] |
//! | daily buckets, outage flags, market CSV, joins | [`series`] |
//! | Pearson correlation and report rows | [`stats`] |
//! | table and plot-series rendering | [`report`] |
//! | command-line driver | [`cli`] |
//!
//! Every stage is streaming: memory use depends on the number of distinct
//! days, not on corpus size.

pub mod annotate;
pub mod cli;
pub mod irc;
pub mod message;
pub mod report;
pub mod sanitize;
pub mod series;
pub mod stats;
pub mod twitter;

pub use message::Message;
