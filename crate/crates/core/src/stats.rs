// SPDX-License-Identifier: Apache-2.0

//! Pearson product-moment correlation and the per-stream correlation report.

use serde::{Deserialize, Serialize};

use crate::series::{align, AlignPolicy, DailySeries, MarketSeries, SeriesError};

/// Slack allowed beyond ±1 before clamping.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} points; at least 3 are needed")]
    TooFewPoints(usize),
    #[error("one series has zero variance")]
    ConstantSeries,
    #[error("input contains NaN or infinity")]
    NonFinite,
}

impl StatsError {
    pub fn name(&self) -> &'static str {
        match self {
            StatsError::LengthMismatch(..) => "LengthMismatch",
            StatsError::TooFewPoints(_) => "TooFewPoints",
            StatsError::ConstantSeries => "ConstantSeries",
            StatsError::NonFinite => "NonFinite",
        }
    }
}

/// Pearson correlation of `x` and `y`.
///
/// Two passes: means first, then deviation sums with the usual correction
/// term for rounding in the means. The cross term multiplies the two
/// deviations once, so `pearson(x, y) == pearson(y, x)` bit for bit.
/// Results within [`CLAMP_TOLERANCE`] of ±1 are clamped.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewPoints(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sx += dx;
        sy += dy;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxx -= sx * sx / n;
    syy -= sy * sy / n;
    sxy -= sx * sy / n;
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    debug_assert!(r.abs() <= 1.0 + 1e-9, "pearson out of range: {r}");
    Ok(r.clamp(-1.0, 1.0))
}

/// One correlation cell of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Correlation {
    Defined { r: f64, n_days: usize },
    Undefined { reason: String, n_days: usize },
}

impl Correlation {
    pub fn value(&self) -> Option<f64> {
        match self {
            Correlation::Defined { r, .. } => Some(*r),
            Correlation::Undefined { .. } => None,
        }
    }

    pub fn n_days(&self) -> usize {
        match self {
            Correlation::Defined { n_days, .. } | Correlation::Undefined { n_days, .. } => *n_days,
        }
    }

    fn from_join(
        counts: &DailySeries,
        market: &MarketSeries,
        policy: ReportPolicy,
    ) -> Self {
        let align_policy = match policy {
            ReportPolicy::AllDays => AlignPolicy::AllDays,
            ReportPolicy::ExcludeOutages => AlignPolicy::ExcludeOutages(counts.flags()),
        };
        match align(&counts.values(), market.values(), align_policy) {
            Err(e @ SeriesError::EmptyOverlap(n)) => Correlation::Undefined {
                reason: e.name().to_string(),
                n_days: n,
            },
            Err(e) => Correlation::Undefined {
                reason: e.name().to_string(),
                n_days: 0,
            },
            Ok(joined) => match pearson(&joined.x, &joined.y) {
                Ok(r) => Correlation::Defined {
                    r,
                    n_days: joined.len(),
                },
                Err(e) => Correlation::Undefined {
                    reason: e.name().to_string(),
                    n_days: joined.len(),
                },
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportPolicy {
    #[default]
    AllDays,
    ExcludeOutages,
}

impl ReportPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ReportPolicy::AllDays => "all-days",
            ReportPolicy::ExcludeOutages => "exclude-outages",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub stream_id: String,
    pub total_messages: u64,
    pub r_volume: Correlation,
    pub r_price: Correlation,
    pub policy: ReportPolicy,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub rows: Vec<ReportRow>,
}

impl CorrelationReport {
    pub fn has_undefined(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.r_volume.value().is_none() || r.r_price.value().is_none())
    }

    pub fn row(&self, stream_id: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.stream_id == stream_id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// One row per stream, in input order. Correlation failures are recorded in
/// the row instead of aborting the report.
pub fn correlation_report(
    daily: &[DailySeries],
    price: &MarketSeries,
    volume: &MarketSeries,
    policy: ReportPolicy,
) -> CorrelationReport {
    let rows = daily
        .iter()
        .map(|s| ReportRow {
            stream_id: s.stream_id.clone(),
            total_messages: s.total(),
            r_volume: Correlation::from_join(s, volume, policy),
            r_price: Correlation::from_join(s, price, policy),
            policy,
        })
        .collect();
    CorrelationReport { rows }
}
