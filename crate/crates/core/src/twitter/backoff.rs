// SPDX-License-Identifier: Apache-2.0

//! Capped exponential reconnect backoff with seeded jitter.
//!
//! `delay = min(cap, base * factor^failures) * (1 + jitter)`, where `failures`
//! is the number of consecutive failures before this one and `jitter` is drawn
//! from `[0, max_jitter)` by a ChaCha stream keyed on `(jitter_seed, failures)`.
//! The same seed and failure index always give the same jitter.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureMode {
    NetworkError,
    HttpError,
    RateLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure(FailureMode),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid backoff policy: {0}")]
pub struct InvalidPolicy(String);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffPolicy {
    pub mode: FailureMode,
    /// Seconds.
    pub base_delay: f64,
    pub factor: f64,
    /// Seconds; applied before jitter.
    pub cap: f64,
    pub jitter_seed: u64,
    /// Upper bound (exclusive) of the jitter fraction; 0 disables jitter.
    pub max_jitter: f64,
}

pub const DEFAULT_MAX_JITTER: f64 = 0.25;

impl BackoffPolicy {
    pub fn new(
        mode: FailureMode,
        base_delay: f64,
        factor: f64,
        cap: f64,
        jitter_seed: u64,
    ) -> Result<Self, InvalidPolicy> {
        let policy = Self {
            mode,
            base_delay,
            factor,
            cap,
            jitter_seed,
            max_jitter: DEFAULT_MAX_JITTER,
        };
        policy.validate()?;
        Ok(policy)
    }

    /// Per-mode defaults: network 0.25s x2 up to 16s, HTTP 5s x2 up to 320s,
    /// rate limit 60s x2 up to 960s.
    pub fn defaults(mode: FailureMode) -> Self {
        let (base_delay, cap) = match mode {
            FailureMode::NetworkError => (0.25, 16.0),
            FailureMode::HttpError => (5.0, 320.0),
            FailureMode::RateLimited => (60.0, 960.0),
        };
        Self {
            mode,
            base_delay,
            factor: 2.0,
            cap,
            jitter_seed: 0,
            max_jitter: DEFAULT_MAX_JITTER,
        }
    }

    pub fn without_jitter(mut self) -> Self {
        self.max_jitter = 0.0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.jitter_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), InvalidPolicy> {
        if !(self.base_delay > 0.0 && self.base_delay.is_finite()) {
            return Err(InvalidPolicy(format!("base_delay {} must be > 0", self.base_delay)));
        }
        if !(self.factor >= 1.0 && self.factor.is_finite()) {
            return Err(InvalidPolicy(format!("factor {} must be >= 1", self.factor)));
        }
        if !(self.cap >= self.base_delay && self.cap.is_finite()) {
            return Err(InvalidPolicy(format!("cap {} must be >= base_delay", self.cap)));
        }
        if !(0.0..=1.0).contains(&self.max_jitter) {
            return Err(InvalidPolicy(format!("max_jitter {} outside [0, 1]", self.max_jitter)));
        }
        Ok(())
    }

    /// Jitter fraction for the `failure_index`-th consecutive failure.
    pub fn jitter(&self, failure_index: u32) -> f64 {
        if self.max_jitter == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.jitter_seed);
        rng.set_stream(u64::from(failure_index));
        rng.random::<f64>() * self.max_jitter
    }

    /// Capped delay before jitter.
    pub fn base_for(&self, failures: u32) -> f64 {
        let exp = i32::try_from(failures).unwrap_or(i32::MAX);
        (self.base_delay * self.factor.powi(exp)).min(self.cap)
    }

    /// Advances the state machine; returns `(delay_seconds, new_state)`.
    pub fn next_delay(&self, state: &BackoffState, outcome: Outcome) -> (f64, BackoffState) {
        match outcome {
            Outcome::Success => (0.0, BackoffState::default()),
            Outcome::Failure(mode) => {
                let failures = state.consecutive_failures;
                let delay = self.base_for(failures) * (1.0 + self.jitter(failures));
                let next = BackoffState {
                    consecutive_failures: failures.saturating_add(1),
                    last_mode: Some(mode),
                };
                (delay, next)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BackoffState {
    pub consecutive_failures: u32,
    pub last_mode: Option<FailureMode>,
}

/// One policy per failure mode. The consecutive-failure count is shared, so a
/// network drop followed by an HTTP error backs off at the HTTP policy's
/// second step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffSchedule {
    pub network: BackoffPolicy,
    pub http: BackoffPolicy,
    pub rate_limited: BackoffPolicy,
}

impl Default for BackoffSchedule {
    fn default() -> Self {
        Self {
            network: BackoffPolicy::defaults(FailureMode::NetworkError),
            http: BackoffPolicy::defaults(FailureMode::HttpError),
            rate_limited: BackoffPolicy::defaults(FailureMode::RateLimited),
        }
    }
}

impl BackoffSchedule {
    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            network: self.network.with_seed(seed),
            http: self.http.with_seed(seed),
            rate_limited: self.rate_limited.with_seed(seed),
        }
    }

    pub fn without_jitter(self) -> Self {
        Self {
            network: self.network.without_jitter(),
            http: self.http.without_jitter(),
            rate_limited: self.rate_limited.without_jitter(),
        }
    }

    pub fn policy(&self, mode: FailureMode) -> &BackoffPolicy {
        match mode {
            FailureMode::NetworkError => &self.network,
            FailureMode::HttpError => &self.http,
            FailureMode::RateLimited => &self.rate_limited,
        }
    }

    pub fn next_delay(&self, state: &BackoffState, outcome: Outcome) -> (f64, BackoffState) {
        match outcome {
            Outcome::Success => (0.0, BackoffState::default()),
            Outcome::Failure(mode) => self.policy(mode).next_delay(state, outcome),
        }
    }
}
