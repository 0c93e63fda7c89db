//! Ground-truth segments from the scheduled observer arrivals.
//!
//! This is a deliberately naive second implementation of the segment rules:
//! it materializes the full (SIP, direct) price timeline for each symbol and
//! scans it for maximal runs of one nonzero sign per side. Events with equal
//! timestamps are collapsed into the state after the last of them.

use std::collections::BTreeMap;

use crate::detect::{DislocationSegment, FeedOrder, Side};
use crate::model::{ExchangeId, FeedEvent, Payload, Price, Source, Symbol, Timestamp};

#[derive(Clone, Copy)]
struct Snapshot {
    ts: u64,
    /// [bid, offer] for SIP and for the direct aggregate.
    sip: [i64; 2],
    direct: [i64; 2],
}

fn best(direct: &BTreeMap<ExchangeId, [i64; 2]>, side: usize) -> i64 {
    let present = direct.values().map(|p| p[side]).filter(|p| *p > 0);
    if side == 0 {
        present.max().unwrap_or(0)
    } else {
        present.min().unwrap_or(0)
    }
}

fn timeline(events: &[&FeedEvent]) -> Vec<Snapshot> {
    let mut sip = [0i64; 2];
    let mut direct: BTreeMap<ExchangeId, [i64; 2]> = BTreeMap::new();
    let mut out: Vec<Snapshot> = Vec::with_capacity(events.len());
    for ev in events {
        let Payload::Quote(q) = ev.payload else { continue };
        match ev.source {
            Source::Sip => sip = [q.bid.0, q.offer.0],
            Source::Direct(x) => {
                direct.insert(x, [q.bid.0, q.offer.0]);
            }
        }
        let snap = Snapshot { ts: ev.ts.0, sip, direct: [best(&direct, 0), best(&direct, 1)] };
        // Simultaneous arrivals: only the state after the whole instant counts.
        match out.last_mut() {
            Some(last) if last.ts == snap.ts => *last = snap,
            _ => out.push(snap),
        }
    }
    out
}

/// Segments implied by `events` (canonical merged order), closing open runs at `session_end`.
pub fn ground_truth(events: &[FeedEvent], session_end: Timestamp) -> Vec<DislocationSegment> {
    let mut by_symbol: BTreeMap<Symbol, Vec<&FeedEvent>> = BTreeMap::new();
    for e in events {
        by_symbol.entry(e.symbol).or_default().push(e);
    }
    let mut out = Vec::new();
    for (symbol, evs) in by_symbol {
        let tl = timeline(&evs);
        for (k, side) in [(0usize, Side::Bid), (1usize, Side::Offer)] {
            let sign = |s: &Snapshot| {
                let (a, b) = (s.sip[k], s.direct[k]);
                if a > 0 && b > 0 && a != b {
                    Some(if a < b { FeedOrder::F1Less } else { FeedOrder::F1Greater })
                } else {
                    None
                }
            };
            let mut i = 0;
            while i < tl.len() {
                let Some(order) = sign(&tl[i]) else {
                    i += 1;
                    continue;
                };
                let mut j = i;
                let (mut lo, mut hi) = (i64::MAX, 0i64);
                while j < tl.len() && sign(&tl[j]) == Some(order) {
                    let m = (tl[j].sip[k] - tl[j].direct[k]).abs();
                    lo = lo.min(m);
                    hi = hi.max(m);
                    j += 1;
                }
                let (end, truncated) = match tl.get(j) {
                    Some(s) => (s.ts, false),
                    None => (session_end.0, true),
                };
                out.push(DislocationSegment {
                    symbol,
                    side,
                    ordering: order,
                    start: Timestamp(tl[i].ts),
                    end: Timestamp(end),
                    min_magnitude: Price(lo),
                    max_magnitude: Price(hi),
                    truncated,
                });
                i = j;
            }
        }
    }
    out.sort_by_key(|s| s.sort_key());
    out
}
