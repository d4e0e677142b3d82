// SPDX-License-Identifier: Apache-2.0

//! Reconnect delays for each failure mode.
//!
//!     cargo run --example backoff_schedule -- [SEED]
//!     cargo run --example backoff_schedule -- --golden SEED

use coinchatter::twitter::{BackoffPolicy, BackoffSchedule, BackoffState, FailureMode, Outcome};

const MODES: [FailureMode; 3] = [FailureMode::NetworkError, FailureMode::HttpError, FailureMode::RateLimited];

fn delays(policy: &BackoffPolicy, n: usize) -> Vec<f64> {
    let mut state = BackoffState::default();
    (0..n)
        .map(|_| {
            let (d, next) = policy.next_delay(&state, Outcome::Failure(policy.mode));
            state = next;
            d
        })
        .collect()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let golden = args.first().is_some_and(|a| a == "--golden");
    let seed: u64 = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(42);
    let schedule = BackoffSchedule::default().with_seed(seed);

    if golden {
        println!("# mode\tfailure\tdelay_seconds (seed {seed})");
        for mode in MODES {
            for (i, d) in delays(schedule.policy(mode), 10).iter().enumerate() {
                println!("{mode:?}\t{i}\t{d:?}");
            }
        }
        return;
    }

    for mode in MODES {
        let plain = delays(&schedule.policy(mode).without_jitter(), 10);
        let jittered = delays(schedule.policy(mode), 10);
        println!("{mode:?}");
        println!("  no jitter: {plain:?}");
        println!("  seed {seed}:   {:?}", jittered.iter().map(|d| (d * 100.0).round() / 100.0).collect::<Vec<_>>());
    }

    let schedule = schedule.without_jitter();
    let mut state = BackoffState::default();
    let mut trace = Vec::new();
    for outcome in [
        Outcome::Failure(FailureMode::HttpError),
        Outcome::Failure(FailureMode::HttpError),
        Outcome::Failure(FailureMode::HttpError),
        Outcome::Success,
        Outcome::Failure(FailureMode::HttpError),
    ] {
        let (d, next) = schedule.next_delay(&state, outcome);
        state = next;
        trace.push(d);
    }
    println!("http, http, http, success, http: {trace:?}");
}
