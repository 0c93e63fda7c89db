//! Planted-structure recovery on simulator output.

use std::collections::BTreeMap;

use disloc_analytics::hist::chi_square_uniform;
use disloc_analytics::{duration_histogram, rank_by, start_time_histogram, Metric};
use disloc_core::detect::{condition, Conditioning, ACTIONABLE_DURATION_NS, MAGNITUDE_FLOOR};
use disloc_core::roc::aggregate_purse;
use disloc_core::sim::{simulate, symbol_meta, SimConfig};
use disloc_core::stats::quantile_sorted;
use disloc_core::{run_events, Category, DislocationSegment, FeedOrder, Price, Side, Symbol, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OPEN: u64 = 34_200_000_000_000;

fn run(cfg: &SimConfig) -> (Vec<DislocationSegment>, Vec<disloc_core::PurseRow>) {
    let mut segs = Vec::new();
    let mut rows = Vec::new();
    for day in simulate(cfg).unwrap() {
        let out = run_events(&day.merged(), None).unwrap();
        assert_eq!(out.segments, day.truth);
        rows.extend(aggregate_purse(&out.records, day.date).into_values());
        segs.extend(out.segments);
    }
    (segs, rows)
}

#[test]
fn uniform_starts_give_flat_histogram() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let len = 23_400_000_000_000u64;
    let segs: Vec<DislocationSegment> = (0..20_000)
        .map(|_| {
            let start = OPEN + rng.random_range(0..len);
            DislocationSegment {
                symbol: Symbol::new("U").unwrap(),
                side: Side::Bid,
                ordering: FeedOrder::F1Less,
                start: Timestamp(start),
                end: Timestamp(start + 1),
                min_magnitude: Price(100),
                max_magnitude: Price(100),
                truncated: false,
            }
        })
        .collect();
    let h = start_time_histogram(&segs, 600_000_000_000, OPEN, len).unwrap();
    let (_, p) = chi_square_uniform(&h.counts).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn open_close_activity_peaks_in_edge_bins() {
    let cfg = SimConfig::from_toml(
        r#"
[topology]
observer = "Carteret"
sip = { location = "Mahwah", processing_ns = 92000 }
exchange = [ { id = "NYSE", location = "Mahwah" }, { id = "NASD", location = "Carteret" } ]
link = [ { from = "Mahwah", to = "Carteret", ns = 282000 }, { from = "Mahwah", to = "Mahwah", ns = 5000 } ]

[process]
seed = 4
date = "2016-01-04"
days = 3
session_length_ns = 600000000000
quote_rate_hz = 5.0
trade_rate_hz = 0.5
open_close_boost = 6.0
boost_decay_s = 20.0
symbol = [ { ticker = "AAA", initial_mid = 500000 }, { ticker = "BBB", initial_mid = 900000 } ]
"#,
    )
    .unwrap();
    let (segs, _) = run(&cfg);
    let h = start_time_histogram(&segs, 60_000_000_000, OPEN, 600_000_000_000).unwrap();
    let c = &h.counts;
    let inner_max = *c[1..c.len() - 1].iter().max().unwrap();
    assert!(c[0] > 2 * inner_max && c[c.len() - 1] > 2 * inner_max, "{c:?}");
}

#[test]
fn two_latency_populations_give_bimodal_durations() {
    // NYSE's SIP path is 97 µs slower than its direct path; FAR's is about a second slower.
    let cfg = SimConfig::from_toml(
        r#"
[topology]
observer = "Carteret"
sip = { location = "Mahwah", processing_ns = 92000 }
exchange = [ { id = "NYSE", location = "Mahwah" }, { id = "FAR", location = "Remote" } ]
link = [ { from = "Mahwah", to = "Carteret", ns = 282000 }, { from = "Mahwah", to = "Mahwah", ns = 5000 },
         { from = "Remote", to = "Carteret", ns = 10000 }, { from = "Remote", to = "Mahwah", ns = 1000000000 } ]

[process]
seed = 8
date = "2016-01-04"
session_length_ns = 3600000000000
quote_rate_hz = 0.3
trade_rate_hz = 0.0
symbol = [ { ticker = "A", initial_mid = 500000 }, { ticker = "B", initial_mid = 700000 }, { ticker = "C", initial_mid = 900000 } ]
"#,
    )
    .unwrap();
    let (segs, _) = run(&cfg);
    let h = duration_histogram(&segs, 2).unwrap();
    let c = &h.counts;
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(c[i]));
    let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
    // Peaks at least two decades apart with a dip between them.
    assert!(b - a >= 4, "{c:?}");
    assert!(c[a + 1..b].iter().any(|&v| v < c[a].min(c[b]) / 2), "{c:?}");
    let peak_decades = [h.edges(a).0, h.edges(b).0];
    assert!(peak_decades[0] <= -3.5 && peak_decades[1] >= -0.5, "{peak_decades:?}");
}

fn category_config() -> SimConfig {
    // Dow names are priced high and move a tick at a time; RexSP names are
    // cheap, quote less often and move in bigger steps.
    let mut symbols = String::new();
    let groups = [
        ("DOW", 1_500_000, 1, 30.0),
        ("SPEXDOW", 600_000, 4, 15.0),
        ("REXSP", 80_000, 8, 6.0),
    ];
    for (g, (cat, mid, step, rate)) in groups.iter().enumerate() {
        for i in 0..4 {
            symbols.push_str(&format!(
                "  {{ ticker = \"{}{i}\", initial_mid = {}, max_step_ticks = {step}, quote_rate_hz = {rate}, trade_rate_hz = {}, category = \"{cat}\" }},\n",
                &cat[..1],
                mid + 10_000 * i as i64 * (g as i64 + 1),
                rate / 3.0
            ));
        }
    }
    let header = r#"
[topology]
observer = "Carteret"
sip = { location = "Mahwah", processing_ns = 400000 }
exchange = [ { id = "NYSE", location = "Mahwah" }, { id = "NASD", location = "Carteret" }, { id = "BATS", location = "Secaucus" } ]
link = [ { from = "Mahwah", to = "Carteret", ns = 282000 }, { from = "Mahwah", to = "Mahwah", ns = 5000 },
         { from = "Secaucus", to = "Carteret", ns = 90000 }, { from = "Secaucus", to = "Mahwah", ns = 190000 } ]

[process]
seed = 31
date = "2016-01-04"
days = 2
session_length_ns = 900000000000
quote_rate_hz = 10.0
trade_rate_hz = 1.0
symbol = [
"#;
    SimConfig::from_toml(&format!("{header}{symbols}]\n")).unwrap()
}

#[test]
fn conditioned_median_magnitude_orders_categories() {
    let cfg = category_config();
    let meta = symbol_meta(&cfg);
    let (segs, _) = run(&cfg);
    let kept = condition(&segs, &Conditioning::duration_and_magnitude(ACTIONABLE_DURATION_NS, MAGNITUDE_FLOOR));
    let mut by_cat: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    for s in &kept {
        by_cat.entry(meta[&s.symbol].category).or_default().push(s.max_magnitude.to_usd());
    }
    let mut median = |c: Category| {
        let v = by_cat.get_mut(&c).expect("segments for every category");
        v.sort_by(f64::total_cmp);
        quantile_sorted(v, 0.5).unwrap()
    };
    let (d, s, r) = (median(Category::Dow), median(Category::SpexDow), median(Category::RexSp));
    assert!(d < s && s < r, "medians {d} {s} {r}");
}

#[test]
fn least_liquid_category_tops_roc_per_traded_value() {
    let cfg = category_config();
    let meta = symbol_meta(&cfg);
    let (_, rows) = run(&cfg);
    let ranking = rank_by(&rows, &meta, Metric::RocPerTradedValue, 12, 0);
    assert_eq!(ranking.top[0].category, Some(Category::RexSp), "{:?}", ranking.top);
    // Individual names are noisy over two short sessions; the category means are not.
    let mut by_cat: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    for r in &ranking.top {
        by_cat.entry(r.category.unwrap()).or_default().push(r.value);
    }
    let mean = |c: Category| by_cat[&c].iter().sum::<f64>() / by_cat[&c].len() as f64;
    let (d, s, r) = (mean(Category::Dow), mean(Category::SpexDow), mean(Category::RexSp));
    assert!(d < s && s < r, "means {d} {s} {r}");
}
