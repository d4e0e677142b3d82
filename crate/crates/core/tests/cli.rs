// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::{esc, fixture};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coinchatter"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn copy_fixture_dir(dst: &Path) {
    for entry in fs::read_dir(fixture("e2e")).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dst.join(entry.file_name())).unwrap();
    }
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["sanitize", "parse-irc", "ingest-tweets", "annotate", "aggregate", "gaps", "correlate", "report", "plot-series", "run-all"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    assert_eq!(code(&["--version"]), 0);
    let gaps_help = String::from_utf8_lossy(&run(&["gaps", "--help"]).stdout).into_owned();
    assert!(gaps_help.contains("[default: 0.1]") && gaps_help.contains("[default: 7]"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&[]), 64);
    assert_eq!(code(&["nope"]), 64);
    assert_eq!(code(&["gaps", "--in", "x.csv"]), 64);
    assert_eq!(code(&["gaps", "--in", "x.csv", "--out", "y.csv", "--window", "seven"]), 64);
}

#[test]
fn missing_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&["parse-irc", "--channel", "#x", "--in", "/no/such.log", "--out", p(&out)]), 2);
    assert_eq!(code(&["ingest-tweets", "--in", "/no/such.jsonl", "--out", p(&out)]), 2);
    assert_eq!(code(&["report", "--in", "/no/such.json"]), 2);
    assert_eq!(code(&["run-all", "--config", "/no/such.toml"]), 2);
    assert!(!out.exists());
}

#[test]
fn sanitize_pipe_and_stats() {
    let mut child = bin()
        .args(["sanitize", "--stats"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let input = format!("{{\"t\":\"a{}b\"}}\nplain\n{}\n", esc("2026"), esc("0041"));
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), format!("{{\"t\":\"a      b\"}}\nplain\n{}\n", esc("0041")));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("lines_in=3") && stderr.contains("replacements=1"), "{stderr}");
}

#[test]
fn stage_by_stage_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = |n: &str| fixture(&format!("e2e/{n}"));
    assert_eq!(code(&["ingest-tweets", "--in", p(&f("tweets.jsonl")), "--out", p(&d.join("tw.jsonl"))]), 0);
    assert_eq!(code(&["parse-irc", "--channel", "#bitcoin", "--in", p(&f("bitcoin.log")), "--out", p(&d.join("irc.jsonl"))]), 0);
    assert_eq!(
        code(&["annotate", "--in", p(&d.join("tw.jsonl")), "--gazetteer", p(&f("gazetteer.tsv")), "--out", p(&d.join("ann.jsonl"))]),
        0
    );
    let annotated = fs::read_to_string(d.join("ann.jsonl")).unwrap();
    assert_eq!(annotated.lines().count(), 32);
    assert!(annotated.contains("\"type\":\"Entity\""));

    for (src, dst) in [("tw.jsonl", "tw.csv"), ("irc.jsonl", "irc.csv")] {
        assert_eq!(code(&["aggregate", "--in", p(&d.join(src)), "--out", p(&d.join(dst))]), 0);
    }
    for (src, dst) in [("tw.csv", "tw_g.csv"), ("irc.csv", "irc_g.csv")] {
        assert_eq!(code(&["gaps", "--in", p(&d.join(src)), "--out", p(&d.join(dst))]), 0);
    }
    let tw = format!("twitter={}", p(&d.join("tw_g.csv")));
    let irc = format!("irc:#bitcoin={}", p(&d.join("irc_g.csv")));
    assert_eq!(
        code(&[
            "correlate", "--series", &tw, "--series", &irc, "--price", p(&f("price.csv")), "--volume",
            p(&f("volume.csv")), "--out", p(&d.join("report.json")),
        ]),
        0
    );
    let out = run(&["report", "--in", p(&d.join("report.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, fs::read(f("expected_report.tsv")).unwrap());

    assert_eq!(
        code(&["plot-series", "--series", p(&d.join("tw_g.csv")), "--market", p(&f("volume.csv")), "--out", p(&d.join("plot.csv"))]),
        0
    );
    assert_eq!(fs::read_to_string(d.join("plot.csv")).unwrap().lines().count(), 8);
}

#[test]
fn lenient_partial_strict_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("x.log");
    fs::write(&log, "[Mon Jun 1 2015] [00:00:00] <a>\thi\nnot a log line\n").unwrap();
    let out = dir.path().join("x.jsonl");
    assert_eq!(code(&["parse-irc", "--channel", "#x", "--in", p(&log), "--out", p(&out)]), 1);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1);
    assert_eq!(code(&["parse-irc", "--channel", "#x", "--in", p(&log), "--out", p(&out), "--strict"]), 2);
}

#[test]
fn undefined_correlation_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("flat.csv"), "date,count,flag\n2015-06-01,4,ok\n2015-06-02,4,ok\n2015-06-03,4,ok\n").unwrap();
    let out = run(&[
        "correlate", "--series", p(&d.join("flat.csv")), "--price", p(&fixture("e2e/price.csv")), "--volume",
        p(&fixture("e2e/volume.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(d.join("r.json"), &out.stdout).unwrap();
    let out = run(&["report", "--in", p(&d.join("r.json")), "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("| flat | 12 | n/a(ConstantSeries) | n/a(ConstantSeries) | 3 | all-days |"), "{table}");
}

#[test]
fn run_all_deterministic_and_golden() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    copy_fixture_dir(a.path());
    copy_fixture_dir(b.path());
    for d in [&a, &b] {
        let out = run(&["run-all", "--config", p(&d.path().join("run.toml"))]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ta = read_tree(&a.path().join("out"));
    let tb = read_tree(&b.path().join("out"));
    assert_eq!(ta, tb);
    assert_eq!(ta["report.tsv"], fs::read(fixture("e2e/expected_report.tsv")).unwrap());
    for f in ["series/twitter.csv", "series/irc__bitcoin.csv", "plots/twitter_volume.csv", "annotated/twitter.jsonl", "report.json"] {
        assert!(ta.contains_key(f), "{f}");
    }
}

#[test]
fn run_all_json_config_with_faults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    copy_fixture_dir(d);
    fs::write(d.join("faults.txt"), "ok\ndrop\nhttp\nok\nrate\n").unwrap();
    let config = serde_json::json!({
        "out_dir": "json-out",
        "price": "price.csv",
        "volume": "volume.csv",
        "format": "markdown",
        "twitter": {"path": "tweets.jsonl", "fault_script": "faults.txt", "jitter_seed": 3},
        "irc": [{"channel": "#bitcoin", "path": "bitcoin.log"}]
    });
    fs::write(d.join("run.json"), config.to_string()).unwrap();
    let out = run(&["run-all", "--config", p(&d.join("run.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let md = fs::read_to_string(d.join("json-out/report.md")).unwrap();
    assert!(md.contains("| Twitter | 32 | 0.9942 | 0.4512 | 7 | all-days |"), "{md}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("reconnects=3"));
}

#[test]
fn run_all_validates_paths_first() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    copy_fixture_dir(d);
    fs::remove_file(d.join("bitcoin.log")).unwrap();
    assert_eq!(code(&["run-all", "--config", p(&d.join("run.toml"))]), 2);
    assert!(!d.join("out").exists());
}
