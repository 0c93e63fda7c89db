//! Dislocation segment detection between the SIP NBBO (feed 1) and the
//! synthetic direct BBO (feed 2).
//!
//! Each side is tracked independently. A segment opens when both prices on a
//! side are present and differ, stays open while the sign of the difference is
//! unchanged, and closes when the prices agree, a side disappears, or the sign
//! flips (in which case a new segment opens at the same instant).

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::book::ConsolidatedBBO;
use crate::error::DetectError;
use crate::model::{Price, Symbol, Timestamp, CENT, PRICE_SCALE};
use crate::stats::Describe;

/// Default duration floor for actionable segments, 545 µs.
pub const ACTIONABLE_DURATION_NS: u64 = 545_000;
/// Default magnitude floor, one cent.
pub const MAGNITUDE_FLOOR: Price = Price(CENT);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bid,
    Offer,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bid, Side::Offer];

    pub fn tag(self) -> &'static str {
        match self {
            Side::Bid => "BID",
            Side::Offer => "OFFER",
        }
    }

    pub fn price(self, bbo: &ConsolidatedBBO) -> Price {
        match self {
            Side::Bid => bbo.bid,
            Side::Offer => bbo.offer,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Sign of (feed 1 − feed 2) on a side, constant over a segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeedOrder {
    F1Less,
    F1Greater,
}

impl FeedOrder {
    pub fn tag(self) -> &'static str {
        match self {
            FeedOrder::F1Less => "F1_LESS",
            FeedOrder::F1Greater => "F1_GREATER",
        }
    }

    /// Ordering of two present, unequal prices; `None` if equal or either absent.
    pub fn between(f1: Price, f2: Price) -> Option<FeedOrder> {
        if !f1.is_present() || !f2.is_present() || f1 == f2 {
            None
        } else if f1 < f2 {
            Some(FeedOrder::F1Less)
        } else {
            Some(FeedOrder::F1Greater)
        }
    }
}

impl fmt::Display for FeedOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DislocationSegment {
    pub symbol: Symbol,
    pub side: Side,
    pub ordering: FeedOrder,
    pub start: Timestamp,
    pub end: Timestamp,
    pub min_magnitude: Price,
    pub max_magnitude: Price,
    /// Closed by end of session rather than by the feeds.
    pub truncated: bool,
}

impl DislocationSegment {
    pub fn duration_ns(&self) -> u64 {
        self.end.0 - self.start.0
    }

    /// Canonical output order: symbol, side, start.
    pub fn sort_key(&self) -> (Symbol, Side, Timestamp) {
        (self.symbol, self.side, self.start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct OpenSegment {
    start: Timestamp,
    ordering: FeedOrder,
    min: Price,
    max: Price,
}

/// Open-segment state for one symbol.
#[derive(Clone, Debug)]
pub struct Detector {
    symbol: Symbol,
    last: Option<Timestamp>,
    open: [Option<OpenSegment>; 2],
}

impl Detector {
    pub fn new(symbol: Symbol) -> Self {
        Detector { symbol, last: None, open: [None, None] }
    }

    pub fn symbol(&self) -> Symbol {
        self.symbol
    }

    /// Whether any side currently has an open segment.
    pub fn is_dislocated(&self) -> bool {
        self.open.iter().any(Option::is_some)
    }

    pub fn is_open(&self, side: Side) -> bool {
        self.open[side as usize].is_some()
    }

    /// Advances both sides to the prices prevailing from `ts` on.
    /// Emits 0–2 segments per side into `out`.
    pub fn step(
        &mut self,
        ts: Timestamp,
        sip: &ConsolidatedBBO,
        dbbo: &ConsolidatedBBO,
        out: &mut Vec<DislocationSegment>,
    ) -> Result<(), DetectError> {
        if let Some(prev) = self.last {
            if ts < prev {
                return Err(DetectError::TimestampRegression { symbol: self.symbol, ts, prev });
            }
        }
        self.last = Some(ts);
        for side in Side::BOTH {
            let f1 = side.price(sip);
            let f2 = side.price(dbbo);
            let now = FeedOrder::between(f1, f2);
            let slot = &mut self.open[side as usize];
            if let Some(open) = slot {
                if Some(open.ordering) == now {
                    let mag = Price((f1.0 - f2.0).abs());
                    open.min = open.min.min(mag);
                    open.max = open.max.max(mag);
                    continue;
                }
                let closed = slot.take().expect("open");
                out.push(DislocationSegment {
                    symbol: self.symbol,
                    side,
                    ordering: closed.ordering,
                    start: closed.start,
                    end: ts,
                    min_magnitude: closed.min,
                    max_magnitude: closed.max,
                    truncated: false,
                });
            }
            if let Some(ordering) = now {
                let mag = Price((f1.0 - f2.0).abs());
                *slot = Some(OpenSegment { start: ts, ordering, min: mag, max: mag });
            }
        }
        Ok(())
    }

    /// Closes any open segment at `session_end`, flagged truncated.
    pub fn finalize(&mut self, session_end: Timestamp, out: &mut Vec<DislocationSegment>) -> Result<(), DetectError> {
        if let Some(last) = self.last {
            if session_end < last {
                return Err(DetectError::SessionEndTooEarly { end: session_end, last });
            }
        }
        for side in Side::BOTH {
            if let Some(open) = self.open[side as usize].take() {
                out.push(DislocationSegment {
                    symbol: self.symbol,
                    side,
                    ordering: open.ordering,
                    start: open.start,
                    end: session_end,
                    min_magnitude: open.min,
                    max_magnitude: open.max,
                    truncated: true,
                });
            }
        }
        Ok(())
    }
}

/// Segment filters. Both floors are strict; truncated segments are dropped
/// whenever a floor is active unless `include_truncated` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Conditioning {
    pub duration_floor_ns: Option<u64>,
    pub magnitude_floor: Option<Price>,
    pub include_truncated: bool,
}

impl Conditioning {
    pub const NONE: Conditioning = Conditioning { duration_floor_ns: None, magnitude_floor: None, include_truncated: false };

    pub fn duration(floor_ns: u64) -> Self {
        Conditioning { duration_floor_ns: Some(floor_ns), ..Self::NONE }
    }

    pub fn duration_and_magnitude(floor_ns: u64, magnitude: Price) -> Self {
        Conditioning { duration_floor_ns: Some(floor_ns), magnitude_floor: Some(magnitude), include_truncated: false }
    }

    pub fn is_unconditioned(&self) -> bool {
        self.duration_floor_ns.is_none() && self.magnitude_floor.is_none()
    }

    pub fn accepts(&self, s: &DislocationSegment) -> bool {
        if self.is_unconditioned() {
            return true;
        }
        if s.truncated && !self.include_truncated {
            return false;
        }
        self.duration_floor_ns.is_none_or(|f| s.duration_ns() > f)
            && self.magnitude_floor.is_none_or(|m| s.min_magnitude > m)
    }
}

pub fn condition(segments: &[DislocationSegment], c: &Conditioning) -> Vec<DislocationSegment> {
    segments.iter().filter(|s| c.accepts(s)).copied().collect()
}

/// Moments and quantiles of segment magnitudes (10⁻⁴ USD) and durations (ns).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentSummary {
    pub count: usize,
    pub min_magnitude: Option<Describe>,
    pub max_magnitude: Option<Describe>,
    pub duration: Option<Describe>,
}

pub fn summarize(segments: &[DislocationSegment]) -> SegmentSummary {
    let mut mins: Vec<f64> = segments.iter().map(|s| s.min_magnitude.0 as f64).collect();
    let mut maxs: Vec<f64> = segments.iter().map(|s| s.max_magnitude.0 as f64).collect();
    let mut durs: Vec<f64> = segments.iter().map(|s| s.duration_ns() as f64).collect();
    SegmentSummary {
        count: segments.len(),
        min_magnitude: Describe::of(&mut mins),
        max_magnitude: Describe::of(&mut maxs),
        duration: Describe::of(&mut durs),
    }
}

impl SegmentSummary {
    /// Renders `stat,min_magnitude_usd,max_magnitude_usd,duration_s` rows;
    /// undefined fields are written as `NA`.
    pub fn write_csv<W: Write>(&self, mut w: W, label: &str) -> std::io::Result<()> {
        let usd = 1.0 / PRICE_SCALE as f64;
        let mins = self.min_magnitude.map(|d| d.scaled(usd));
        let maxs = self.max_magnitude.map(|d| d.scaled(usd));
        let durs = self.duration.map(|d| d.scaled(1e-9));
        writeln!(w, "{label},count,{},,", self.count)?;
        type Pick = fn(&Describe) -> Option<f64>;
        let rows: [(&str, Pick); 7] = [
            ("mean", |d| Some(d.mean)),
            ("std", |d| d.std),
            ("min", |d| Some(d.min)),
            ("25%", |d| Some(d.q25)),
            ("50%", |d| Some(d.q50)),
            ("75%", |d| Some(d.q75)),
            ("max", |d| Some(d.max)),
        ];
        let cell = |d: &Option<Describe>, pick: Pick, prec: usize| match d.as_ref().and_then(pick) {
            Some(v) => format!("{v:.prec$}"),
            None => "NA".to_string(),
        };
        for (name, pick) in rows {
            writeln!(w, "{label},{name},{},{},{}", cell(&mins, pick, 4), cell(&maxs, pick, 4), cell(&durs, pick, 6))?;
        }
        Ok(())
    }
}

pub const SEGMENT_CSV_HEADER: &str =
    "symbol,side,ordering,start_ns,end_ns,duration_ns,min_mag_1e-4usd,max_mag_1e-4usd,truncated";

pub fn write_segments<W: Write>(mut w: W, segments: &[DislocationSegment]) -> std::io::Result<()> {
    writeln!(w, "{SEGMENT_CSV_HEADER}")?;
    for s in segments {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.symbol,
            s.side,
            s.ordering,
            s.start.0,
            s.end.0,
            s.duration_ns(),
            s.min_magnitude.0,
            s.max_magnitude.0,
            s.truncated
        )?;
    }
    w.flush()
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BID" => Ok(Side::Bid),
            "OFFER" => Ok(Side::Offer),
            _ => Err(format!("unknown side {s:?}")),
        }
    }
}

impl FromStr for FeedOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F1_LESS" => Ok(FeedOrder::F1Less),
            "F1_GREATER" => Ok(FeedOrder::F1Greater),
            _ => Err(format!("unknown ordering {s:?}")),
        }
    }
}

/// Reads the segment CSV; errors carry the 1-based line number.
pub fn read_segments<R: Read>(input: R) -> Result<Vec<DislocationSegment>, (u64, String)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(|e| (1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != SEGMENT_CSV_HEADER {
        return Err((1, "unexpected segment CSV header".into()));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| (e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let err = |m: String| (line, m);
        if rec.len() != 9 {
            return Err(err(format!("expected 9 fields, got {}", rec.len())));
        }
        let num = |i: usize| rec[i].parse::<u64>().map_err(|_| err(format!("field {i}: not an integer")));
        let seg = DislocationSegment {
            symbol: Symbol::new(&rec[0]).map_err(|e| err(e.to_string()))?,
            side: rec[1].parse().map_err(err)?,
            ordering: rec[2].parse().map_err(err)?,
            start: Timestamp(num(3)?),
            end: Timestamp(num(4)?),
            min_magnitude: Price(num(6)? as i64),
            max_magnitude: Price(num(7)? as i64),
            truncated: rec[8].parse().map_err(|_| err("truncated: expected true/false".into()))?,
        };
        if seg.end < seg.start || seg.duration_ns() != num(5)? {
            return Err(err("duration_ns inconsistent with start/end".into()));
        }
        out.push(seg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym() -> Symbol {
        Symbol::new("AAPL").unwrap()
    }

    fn bbo(bid: i64, offer: i64) -> ConsolidatedBBO {
        ConsolidatedBBO { bid: Price(bid), bid_size: 100, offer: Price(offer), offer_size: 100, ts: Timestamp(0) }
    }

    #[test]
    fn figure_two_timeline() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.step(Timestamp(0), &bbo(100_000, 100_200), &bbo(100_100, 100_200), &mut out).unwrap();
        assert!(out.is_empty());
        assert!(d.is_open(Side::Bid));
        d.step(Timestamp(97_000), &bbo(100_100, 100_200), &bbo(100_100, 100_200), &mut out).unwrap();
        assert_eq!(out.len(), 1);
        let s = out[0];
        assert_eq!((s.side, s.ordering, s.duration_ns()), (Side::Bid, FeedOrder::F1Less, 97_000));
        assert_eq!((s.min_magnitude, s.max_magnitude), (Price(100), Price(100)));
        assert!(!s.truncated);
    }

    #[test]
    fn equal_feeds_never_dislocate() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        for i in 0..100 {
            let b = bbo(100_000 + i * 100, 100_500 + i * 100);
            d.step(Timestamp(i as u64), &b, &b, &mut out).unwrap();
        }
        d.finalize(Timestamp(1_000), &mut out).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn sign_flip_closes_and_reopens_at_same_instant() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.step(Timestamp(10), &bbo(100_000, 0), &bbo(100_100, 0), &mut out).unwrap();
        d.step(Timestamp(20), &bbo(100_200, 0), &bbo(100_100, 0), &mut out).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].ordering, out[0].end), (FeedOrder::F1Less, Timestamp(20)));
        d.finalize(Timestamp(30), &mut out).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!((out[1].ordering, out[1].start, out[1].end), (FeedOrder::F1Greater, Timestamp(20), Timestamp(30)));
        assert!(out[1].truncated);
    }

    #[test]
    fn absent_side_closes_and_never_opens() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.step(Timestamp(0), &bbo(0, 100_200), &bbo(100_100, 100_200), &mut out).unwrap();
        assert!(!d.is_dislocated());
        d.step(Timestamp(1), &bbo(100_000, 100_200), &bbo(100_100, 100_200), &mut out).unwrap();
        d.step(Timestamp(5), &bbo(100_000, 100_200), &bbo(0, 100_200), &mut out).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].duration_ns(), 4);
    }

    #[test]
    fn magnitudes_track_extremes() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.step(Timestamp(0), &bbo(100_000, 0), &bbo(100_200, 0), &mut out).unwrap();
        d.step(Timestamp(1), &bbo(100_000, 0), &bbo(100_500, 0), &mut out).unwrap();
        d.step(Timestamp(2), &bbo(100_000, 0), &bbo(100_100, 0), &mut out).unwrap();
        d.step(Timestamp(3), &bbo(100_000, 0), &bbo(100_000, 0), &mut out).unwrap();
        assert_eq!((out[0].min_magnitude, out[0].max_magnitude), (Price(100), Price(500)));
    }

    #[test]
    fn timestamp_regression_is_an_error() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.step(Timestamp(10), &bbo(1, 2), &bbo(1, 2), &mut out).unwrap();
        assert!(matches!(
            d.step(Timestamp(9), &bbo(1, 2), &bbo(1, 2), &mut out),
            Err(DetectError::TimestampRegression { .. })
        ));
    }

    #[test]
    fn finalize_with_nothing_open_is_empty() {
        let mut d = Detector::new(sym());
        let mut out = Vec::new();
        d.finalize(Timestamp(5), &mut out).unwrap();
        assert!(out.is_empty());
    }

    fn seg(duration: u64, min_mag: i64, truncated: bool) -> DislocationSegment {
        DislocationSegment {
            symbol: sym(),
            side: Side::Bid,
            ordering: FeedOrder::F1Less,
            start: Timestamp(1_000),
            end: Timestamp(1_000 + duration),
            min_magnitude: Price(min_mag),
            max_magnitude: Price(min_mag),
            truncated,
        }
    }

    #[test]
    fn conditioning_is_strict() {
        let c = Conditioning::duration(ACTIONABLE_DURATION_NS);
        assert!(c.accepts(&seg(546_000, 100, false)));
        assert!(!c.accepts(&seg(545_000, 100, false)));
        let cm = Conditioning::duration_and_magnitude(ACTIONABLE_DURATION_NS, MAGNITUDE_FLOOR);
        assert!(cm.accepts(&seg(600_000, 200, false)));
        assert!(!cm.accepts(&seg(600_000, 100, false)));
    }

    #[test]
    fn truncated_dropped_from_conditioned_by_default() {
        let segs = vec![seg(600_000, 200, true), seg(600_000, 200, false), seg(10, 100, true)];
        assert_eq!(condition(&segs, &Conditioning::NONE).len(), 3);
        let c = Conditioning::duration(ACTIONABLE_DURATION_NS);
        let oracle = segs.iter().filter(|s| !s.truncated && s.duration_ns() > 545_000).count();
        assert_eq!(condition(&segs, &c).len(), oracle);
        let keep = Conditioning { include_truncated: true, ..c };
        assert_eq!(condition(&segs, &keep).len(), 2);
    }

    #[test]
    fn summary_singleton_and_midpoint() {
        let s = summarize(&[seg(97_000, 100, false)]);
        let d = s.duration.unwrap();
        assert_eq!((d.min, d.q25, d.q50, d.q75, d.max), (97_000.0, 97_000.0, 97_000.0, 97_000.0, 97_000.0));
        let s = summarize(&[seg(100_000, 100, false), seg(300_000, 100, false)]);
        assert_eq!(s.duration.unwrap().q50, 200_000.0);
        let empty = summarize(&[]);
        assert_eq!(empty.count, 0);
        assert!(empty.duration.is_none());
    }

    #[test]
    fn summary_matches_naive_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let segs: Vec<_> =
            (0..1_000).map(|_| seg(rng.random_range(1..5_000_000), rng.random_range(1..20) * 100, false)).collect();
        let s = summarize(&segs);
        let mut durs: Vec<u64> = segs.iter().map(|s| s.duration_ns()).collect();
        durs.sort_unstable();
        let n = durs.len() as f64;
        let mean = durs.iter().map(|&d| d as f64).sum::<f64>() / n;
        let var = durs.iter().map(|&d| (d as f64 - mean) * (d as f64 - mean)).sum::<f64>() / (n - 1.0);
        // Type-7 median of 1000 values is the average of the 500th and 501st.
        let median = (durs[499] + durs[500]) as f64 / 2.0;
        // 25%: h = 999 * 0.25 = 249.75.
        let q25 = durs[249] as f64 + 0.75 * (durs[250] as f64 - durs[249] as f64);
        let d = s.duration.unwrap();
        assert!((d.mean - mean).abs() < 1e-6);
        assert!((d.std.unwrap() - var.sqrt()).abs() < 1e-6);
        assert_eq!(d.q50, median);
        assert!((d.q25 - q25).abs() < 1e-9);
        assert_eq!(d.max, *durs.last().unwrap() as f64);
    }

    /// Brute-force oracle: apply every (sip, dbbo) state in order, then scan
    /// each side for maximal runs of one nonzero sign.
    fn run_scan(states: &[(u64, ConsolidatedBBO, ConsolidatedBBO)], end: u64) -> Vec<DislocationSegment> {
        let mut out = Vec::new();
        for side in Side::BOTH {
            let signs: Vec<Option<(FeedOrder, i64)>> = states
                .iter()
                .map(|(_, a, b)| {
                    let (p, q) = (side.price(a).0, side.price(b).0);
                    if p > 0 && q > 0 && p != q {
                        Some((if p < q { FeedOrder::F1Less } else { FeedOrder::F1Greater }, (p - q).abs()))
                    } else {
                        None
                    }
                })
                .collect();
            let mut i = 0;
            while i < states.len() {
                let Some((ord, _)) = signs[i] else {
                    i += 1;
                    continue;
                };
                let mut j = i;
                let mut mags = Vec::new();
                while j < states.len() && signs[j].map(|s| s.0) == Some(ord) {
                    mags.push(signs[j].unwrap().1);
                    j += 1;
                }
                let (stop, truncated) = if j < states.len() { (states[j].0, false) } else { (end, true) };
                out.push(DislocationSegment {
                    symbol: sym(),
                    side,
                    ordering: ord,
                    start: Timestamp(states[i].0),
                    end: Timestamp(stop),
                    min_magnitude: Price(*mags.iter().min().unwrap()),
                    max_magnitude: Price(*mags.iter().max().unwrap()),
                    truncated,
                });
                i = j;
            }
        }
        out.sort_by_key(|s| s.sort_key());
        out
    }

    #[test]
    fn random_walk_matches_run_scan_oracle() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sip = bbo(100_000, 100_200);
            let mut dir = bbo(100_000, 100_200);
            let mut states = Vec::new();
            let mut ts = 0u64;
            for _ in 0..10_000 {
                ts += rng.random_range(0..3);
                let target = if rng.random_bool(0.5) { &mut sip } else { &mut dir };
                let mv = |rng: &mut ChaCha8Rng, p: Price| {
                    if rng.random_bool(0.05) {
                        Price(0)
                    } else {
                        Price((p.0.max(99_000) + rng.random_range(-1i64..=1) * 100).max(100))
                    }
                };
                if rng.random_bool(0.5) {
                    target.bid = mv(&mut rng, target.bid);
                } else {
                    target.offer = mv(&mut rng, target.offer);
                }
                states.push((ts, sip, dir));
            }
            let end = ts + 10;
            let mut d = Detector::new(sym());
            let mut got = Vec::new();
            for (t, a, b) in &states {
                d.step(Timestamp(*t), a, b, &mut got).unwrap();
            }
            d.finalize(Timestamp(end), &mut got).unwrap();
            got.sort_by_key(|s| s.sort_key());
            let want = run_scan(&states, end);
            assert_eq!(got, want, "seed {seed}");
        }
    }

    #[test]
    fn size_only_updates_do_not_change_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut plain = Detector::new(sym());
        let mut noisy = Detector::new(sym());
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let mut sip = bbo(100_000, 100_200);
        let mut dir = sip;
        for t in 0..2_000u64 {
            if rng.random_bool(0.5) {
                sip.bid = Price(100_000 + rng.random_range(-1i64..=1) * 100);
            } else {
                dir.bid = Price(100_000 + rng.random_range(-1i64..=1) * 100);
            }
            plain.step(Timestamp(t * 10), &sip, &dir, &mut a).unwrap();
            noisy.step(Timestamp(t * 10), &sip, &dir, &mut b).unwrap();
            let mut resized = dir;
            resized.bid_size += 1;
            noisy.step(Timestamp(t * 10 + 5), &sip, &resized, &mut b).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn segment_csv_round_trip() {
        let segs = vec![seg(97_000, 100, false), seg(5, 300, true)];
        let mut buf = Vec::new();
        write_segments(&mut buf, &segs).unwrap();
        assert_eq!(read_segments(buf.as_slice()).unwrap(), segs);
    }
}
