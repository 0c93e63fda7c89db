use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use disloc_core::detect::{read_segments, write_segments};
use disloc_core::pipeline::run_events;
use disloc_core::roc::{aggregate_purse, PurseReport};
use disloc_core::sim::{simulate, SimConfig};

const CONFIG: &str = r#"
[topology]
observer = "Carteret"
sip = { location = "Mahwah", processing_ns = 92000 }
exchange = [ { id = "NYSE", location = "Mahwah" }, { id = "NASD", location = "Carteret" }, { id = "BATS", location = "Secaucus" } ]
link = [ { from = "Mahwah", to = "Carteret", ns = 282000 }, { from = "Mahwah", to = "Mahwah", ns = 5000 },
         { from = "Secaucus", to = "Carteret", ns = 90000 }, { from = "Secaucus", to = "Mahwah", ns = 190000 } ]
jitter_ns = 3000

[process]
seed = 7
date = "2016-01-04"
days = 2
session_length_ns = 120000000000
quote_rate_hz = 30.0
trade_rate_hz = 6.0
midpoint_prob = 0.1
symbol = [
  { ticker = "AAPL", initial_mid = 1000000, category = "DOW", market_cap = 600000000000 },
  { ticker = "XOM", initial_mid = 800000, quote_rate_hz = 15.0, category = "SPEXDOW", market_cap = 300000000000 },
  { ticker = "PLUG", initial_mid = 30000, max_step_ticks = 3, category = "REXSP", market_cap = 400000000 },
]
"#;

fn disloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disloc")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = disloc(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _tmp: tempfile::TempDir,
    root: PathBuf,
    config: PathBuf,
}

fn fixture() -> Fixture {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let config = root.join("c.toml");
    fs::write(&config, CONFIG).unwrap();
    Fixture { _tmp: tmp, root, config }
}

fn stderr_line(o: &Output) -> String {
    let e = String::from_utf8_lossy(&o.stderr).into_owned();
    assert_eq!(e.lines().count(), 1, "{e}");
    e
}

#[test]
fn figure2_prints_segment_and_pass() {
    let out = ok(&["figure2"]);
    assert!(out.contains("segment AAPL BID F1_LESS") && out.contains("duration_ns=97000 min_mag=$0.01 max_mag=$0.01"), "{out}");
    assert_eq!(out.lines().last(), Some("PASS"));
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let f = fixture();
    let (a, b, c) = (f.root.join("a"), f.root.join("b"), f.root.join("c"));
    ok(&["simulate", "--config", s(&f.config), "--seed", "7", "-o", s(&a), "--threads", "1"]);
    ok(&["simulate", "--config", s(&f.config), "--seed", "7", "-o", s(&b), "--threads", "4"]);
    ok(&["simulate", "--config", s(&f.config), "--seed", "8", "-o", s(&c)]);
    let m = |d: &Path| fs::read_to_string(d.join("MANIFEST.sha256")).unwrap();
    assert_eq!(m(&a), m(&b));
    assert_ne!(m(&a), m(&c));
    assert!(m(&a).contains("  2016-01-05/direct_BATS.events\n"));
}

#[test]
fn staged_pipeline_matches_in_process_run() {
    let f = fixture();
    let sim = f.root.join("sim");
    ok(&["simulate", "--config", s(&f.config), "-o", s(&sim)]);
    let days = simulate(&SimConfig::from_toml(CONFIG).unwrap()).unwrap();

    let det1 = f.root.join("det1");
    let det4 = f.root.join("det4");
    ok(&["detect", s(&sim), "-o", s(&det1)]);
    ok(&["detect", s(&sim), "-o", s(&det4), "--threads", "4"]);
    assert_eq!(fs::read(det1.join("MANIFEST.sha256")).unwrap(), fs::read(det4.join("MANIFEST.sha256")).unwrap());

    let roc = f.root.join("roc");
    ok(&["roc", s(&sim), "-o", s(&roc)]);
    let mut rows = Vec::new();
    for day in &days {
        let date = day.date.format("%Y-%m-%d").to_string();
        let out = run_events(&day.merged(), None).unwrap();
        let mut expected = Vec::new();
        write_segments(&mut expected, &out.segments).unwrap();
        let got = fs::read(det1.join(&date).join("segments.csv")).unwrap();
        assert_eq!(got, expected, "{date}");
        // The simulator's ground truth uses the same writer, so it must match byte for byte.
        assert_eq!(got, fs::read(sim.join(&date).join("ground_truth.csv")).unwrap());
        rows.extend(aggregate_purse(&out.records, day.date).into_values());
    }
    let report = ok(&["report", "--purse", s(&roc.join("purse.csv"))]);
    assert_eq!(report, PurseReport::from_rows(&rows).to_string());
}

#[test]
fn conditioned_sets_are_nested_and_strict() {
    let f = fixture();
    let sim = f.root.join("sim");
    let det = f.root.join("det");
    ok(&["simulate", "--config", s(&f.config), "-o", s(&sim)]);
    ok(&["detect", s(&sim.join("2016-01-04")), "-o", s(&det)]);
    let read = |n: &str| read_segments(fs::File::open(det.join(n)).unwrap()).unwrap();
    let (all, dur, both) = (read("segments.csv"), read("segments_duration.csv"), read("segments_conditioned.csv"));
    assert!(all.len() >= dur.len() && dur.len() >= both.len() && !both.is_empty());
    assert!(dur.iter().all(|x| all.contains(x) && x.duration_ns() > 545_000 && !x.truncated));
    assert!(both.iter().all(|x| dur.contains(x) && x.min_magnitude.0 > 100));
    // Raising the floors to an observed value must exclude that value.
    let edge = both.iter().map(|x| x.duration_ns()).min().unwrap();
    let det2 = f.root.join("det2");
    let us = format!("{}", edge as f64 / 1000.0);
    ok(&["detect", s(&sim.join("2016-01-04")), "-o", s(&det2), "--duration-us", &us]);
    let strict = read_segments(fs::File::open(det2.join("segments_conditioned.csv")).unwrap()).unwrap();
    assert!(strict.iter().all(|x| x.duration_ns() > edge));
    assert!(strict.len() < both.len());
}

#[test]
fn analyze_and_report_write_their_artifacts() {
    let f = fixture();
    let (sim, det, roc, an, rep) = (f.root.join("sim"), f.root.join("det"), f.root.join("roc"), f.root.join("an"), f.root.join("rep"));
    ok(&["simulate", "--config", s(&f.config), "-o", s(&sim)]);
    ok(&["detect", s(&sim), "-o", s(&det)]);
    ok(&["roc", s(&sim), "-o", s(&roc)]);
    let meta = sim.join("symbols.csv");
    ok(&["report", "--purse", s(&roc.join("purse.csv")), "--meta", s(&meta), "-o", s(&rep)]);
    for n in ["report.txt", "report.csv", "purse_by_category.csv", "report_by_category.csv", "MANIFEST.sha256"] {
        assert!(rep.join(n).is_file(), "{n}");
    }
    ok(&[
        "analyze",
        "--segments",
        s(&det.join("2016-01-04/segments.csv")),
        s(&det.join("2016-01-05/segments.csv")),
        "--purse",
        s(&roc.join("purse.csv")),
        "--meta",
        s(&meta),
        "--session-length-ns",
        "120000000000",
        "--bin-s",
        "10",
        "--max-lag",
        "1",
        "-o",
        s(&an),
    ]);
    let hist = fs::read_to_string(an.join("start_histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 13);
    let circle = fs::read_to_string(an.join("circle.csv")).unwrap();
    let segs: usize = ["2016-01-04", "2016-01-05"]
        .iter()
        .map(|d| fs::read_to_string(det.join(d).join("segments.csv")).unwrap().lines().count() - 1)
        .sum();
    assert_eq!(circle.lines().count() - 1, segs);
    let ranks = fs::read_to_string(an.join("rankings.csv")).unwrap();
    assert!(ranks.contains("roc_per_traded_value,top,1,"));
    let notes = fs::read_to_string(an.join("notes.txt")).unwrap();
    assert!(notes.contains("DFA: need at least"), "{notes}");
}

#[test]
fn inputs_are_not_modified() {
    let f = fixture();
    let sim = f.root.join("sim");
    ok(&["simulate", "--config", s(&f.config), "-o", s(&sim)]);
    let before = fs::read_to_string(sim.join("MANIFEST.sha256")).unwrap();
    ok(&["detect", s(&sim), "-o", s(&f.root.join("d"))]);
    ok(&["roc", s(&sim), "-o", s(&f.root.join("r"))]);
    fs::remove_file(sim.join("MANIFEST.sha256")).unwrap();
    let sums = disloc_cli::files::checksums(&sim).unwrap();
    let after: String = sums.iter().map(|(p, h)| format!("{h}  {p}\n")).collect();
    assert_eq!(before, after);
}

#[test]
fn errors_are_single_lines_with_exit_codes() {
    let f = fixture();
    let bad = f.root.join("bad.events");
    fs::write(&bad, "Q,1,AAPL,SIP,1000000,100,1000100,100\nQ,2,AAPL,SIP,ten,100,1000100,100\n").unwrap();
    let o = disloc(&["detect", s(&bad), "-o", s(&f.root.join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_line(&o);
    assert!(e.starts_with(&format!("error code=3 kind=format file={} line=2 ", bad.display())), "{e}");

    let o = disloc(&["detect", s(&f.root.join("absent.events")), "-o", s(&f.root.join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).contains("kind=missing"));

    let o = disloc(&["detect", "--duration-us"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_line(&o).starts_with("error code=2 kind=usage"));

    // Without a header, ROC needs the session date.
    let good = f.root.join("good.events");
    fs::write(&good, "Q,1,AAPL,SIP,1000000,100,1000100,100\nT,2,AAPL,SIP,1000000,100\n").unwrap();
    let o = disloc(&["roc", s(&good), "-o", s(&f.root.join("r"))]);
    assert_eq!(o.status.code(), Some(2));
    ok(&["roc", s(&good), "-o", s(&f.root.join("r")), "--date", "2016-01-04"]);

    let purse = f.root.join("r/purse.csv");
    let text = fs::read_to_string(&purse).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
    fields[8] = "5".into();
    lines[1] = fields.join(",");
    fs::write(&purse, lines.join("\n") + "\n").unwrap();
    let o = disloc(&["report", "--purse", s(&purse)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_line(&o).contains("line=2"));

    let cfg = f.root.join("broken.toml");
    fs::write(&cfg, "[topology]\n").unwrap();
    let o = disloc(&["simulate", "--config", s(&cfg), "-o", s(&f.root.join("s"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_line(&o).contains("file="));
}
