// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use coinchatter::report::emit_plot_series;
use coinchatter::series::{
    align, bucket_daily, detect_gaps, AlignPolicy, DailySeries, DayFlag, GapParams, MarketSeries, Metric, SeriesError,
};
use coinchatter::stats::{pearson, StatsError};
use coinchatter::Message;
use common::{day, gap_oracle, naive_pearson, rng};
use proptest::prelude::*;
use rand::RngExt;

fn dated(offsets: &[u64], seed: f64) -> BTreeMap<chrono::NaiveDate, f64> {
    offsets.iter().map(|&i| (day(i), seed + i as f64)).collect()
}

proptest! {
    #[test]
    fn align_is_set_intersection(a in proptest::collection::btree_set(0u64..40, 0..30),
                                 b in proptest::collection::btree_set(0u64..40, 0..30)) {
        let a: Vec<u64> = a.into_iter().collect();
        let b: Vec<u64> = b.into_iter().collect();
        let (ma, mb) = (dated(&a, 0.5), dated(&b, 100.0));
        let want: BTreeSet<u64> = a.iter().filter(|d| b.contains(d)).copied().collect();
        match align(&ma, &mb, AlignPolicy::AllDays) {
            Ok(j) => {
                prop_assert!(want.len() >= 3);
                prop_assert_eq!(j.dates, want.iter().map(|&i| day(i)).collect::<Vec<_>>());
                prop_assert_eq!(j.x, want.iter().map(|&i| 0.5 + i as f64).collect::<Vec<_>>());
                prop_assert_eq!(j.y, want.iter().map(|&i| 100.0 + i as f64).collect::<Vec<_>>());
            }
            Err(SeriesError::EmptyOverlap(n)) => prop_assert!(n == want.len() && n < 3),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn gaps_match_scan(counts in proptest::collection::vec(0u64..500, 1..60), theta in 0.05f64..0.9, window in 1usize..10) {
        let s = DailySeries::from_counts("s", counts.iter().enumerate().map(|(i, &c)| (day(i as u64), c)));
        let flagged = detect_gaps(&s, GapParams::new(theta, window).unwrap());
        let got: Vec<bool> = flagged.flags().values().map(|f| *f == DayFlag::Outage).collect();
        prop_assert_eq!(got, gap_oracle(&counts, theta, window));
    }

    #[test]
    fn pearson_properties(pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60),
                          a in 0.01f64..100.0, b in -1e4f64..1e4) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert_eq!(r.to_bits(), pearson(&y, &x).unwrap().to_bits());
        prop_assert!((r - naive_pearson(&x, &y)).abs() < 1e-10);
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let flipped: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((pearson(&scaled, &y).unwrap() - r).abs() <= 1e-9);
        prop_assert!((pearson(&flipped, &y).unwrap() + r).abs() <= 1e-9);
    }
}

#[test]
fn affine_invariance_tight() {
    // exact-in-binary scale and shift keep the 1e-12 bound
    let mut r = rng(5);
    for _ in 0..200 {
        let n = r.random_range(3..80);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-100.0..100.0)).collect();
        let base = pearson(&x, &y).unwrap();
        let up: Vec<f64> = x.iter().map(|v| 4.0 * v + 8.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -0.5 * v + 3.0).collect();
        assert!((pearson(&up, &y).unwrap() - base).abs() <= 1e-12);
        assert!((pearson(&down, &y).unwrap() + base).abs() <= 1e-12);
    }
}

#[test]
fn pearson_error_cases() {
    assert_eq!(pearson(&[], &[]), Err(StatsError::TooFewPoints(0)));
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::ConstantSeries));
    assert_eq!(pearson(&[1.0, 2.0, f64::INFINITY], &[1.0, 2.0, 3.0]), Err(StatsError::NonFinite));
}

#[test]
fn bucket_daily_matches_tally() {
    let mut r = rng(21);
    let start = Utc.with_ymd_and_hms(2015, 6, 1, 0, 0, 0).unwrap();
    let mut tally: BTreeMap<chrono::NaiveDate, u64> = BTreeMap::new();
    let mut messages = Vec::new();
    for _ in 0..5000 {
        let secs = r.random_range(0..30 * 86_400i64);
        let ts = start + Duration::seconds(secs);
        *tally.entry(ts.date_naive()).or_default() += 1;
        messages.push(Message::new("s", ts, "a", "t"));
    }
    let s = bucket_daily(&messages, "s");
    for (d, c) in s.counts() {
        assert_eq!(*c, tally.get(d).copied().unwrap_or(0), "{d}");
    }
    assert_eq!(s.total(), 5000);
    assert_eq!(s.counts().keys().next(), tally.keys().next());
    assert_eq!(s.counts().keys().last(), tally.keys().last());
}

#[test]
fn interior_days_filled_edges_not() {
    let ts = |d: u32| Utc.with_ymd_and_hms(2015, 6, d, 12, 0, 0).unwrap();
    let messages = [Message::new("s", ts(3), "a", "x"), Message::new("s", ts(6), "a", "y")];
    let s = bucket_daily(&messages, "s");
    assert_eq!(s.counts().values().copied().collect::<Vec<_>>(), vec![1, 0, 0, 1]);
}

#[test]
fn csv_roundtrip() {
    let s = detect_gaps(
        &DailySeries::from_counts("s", [(day(0), 100), (day(1), 0), (day(2), 90), (day(3), 3)]),
        GapParams::default(),
    );
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let back = DailySeries::read_csv("s", &buf[..]).unwrap();
    assert_eq!(back, s);
    assert_eq!(back.outage_days(), vec![day(1), day(3)]);
}

#[test]
fn plot_rows_equal_align_len() {
    let mut r = rng(8);
    for _ in 0..100 {
        let sd: Vec<u64> = (0..30).filter(|_| r.random_bool(0.7)).collect();
        let md: Vec<u64> = (0..30).filter(|_| r.random_bool(0.7)).collect();
        if sd.is_empty() {
            continue;
        }
        let s = DailySeries::from_counts("s", sd.iter().map(|&i| (day(i), i + 1)));
        let m = MarketSeries::new(Metric::VolumeUsd, md.iter().map(|&i| (day(i), i as f64))).unwrap();
        let mut out = Vec::new();
        match (emit_plot_series(&s, &m, &mut out), align(&s.values(), m.values(), AlignPolicy::AllDays)) {
            (Ok(n), Ok(j)) => {
                assert_eq!(n, j.len());
                assert_eq!(String::from_utf8(out).unwrap().lines().count(), n + 1);
            }
            (Err(SeriesError::EmptyOverlap(a)), Err(SeriesError::EmptyOverlap(b))) => assert_eq!(a, b),
            other => panic!("disagreement: {other:?}"),
        }
    }
}

#[test]
fn exclude_outages_drops_days() {
    let s = detect_gaps(
        &DailySeries::from_counts("s", (0..6).map(|i| (day(i), if i == 3 { 0 } else { 50 + i }))),
        GapParams::default(),
    );
    let m: BTreeMap<_, _> = (0..6).map(|i| (day(i), i as f64)).collect();
    assert_eq!(align(&s.values(), &m, AlignPolicy::AllDays).unwrap().len(), 6);
    let j = align(&s.values(), &m, AlignPolicy::ExcludeOutages(s.flags())).unwrap();
    assert_eq!(j.len(), 5);
    assert!(!j.dates.contains(&day(3)));
}

#[test]
fn market_csv_errors() {
    let dup = "date,value\n2015-06-01,1\n2015-06-01,2\n";
    assert!(matches!(MarketSeries::from_csv(Metric::PriceUsd, dup.as_bytes()), Err(SeriesError::DuplicateDate(_))));
    let neg = "date,value\n2015-06-01,-1\n";
    assert!(matches!(MarketSeries::from_csv(Metric::PriceUsd, neg.as_bytes()), Err(SeriesError::NegativeValue(_))));
    let bad = "date,value\nJune 1,1\n";
    assert!(matches!(MarketSeries::from_csv(Metric::PriceUsd, bad.as_bytes()), Err(SeriesError::MalformedRow { .. })));
}
