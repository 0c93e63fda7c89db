//! Shared generators and brute-force oracles for integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::NaiveDate;
use disloc_core::sim::config::{ExchangeSite, LinkSpec, QuoteProcessConfig, SipSite, SymbolProcess, TopologyConfig};
use disloc_core::sim::SimConfig;
use disloc_core::{ExchangeId, FeedEvent, Payload, Price, Quote, Source, Symbol, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VENUES: [&str; 8] = ["NYSE", "NASD", "BATS", "EDGX", "ARCA", "IEXG", "BYXX", "AMEX"];
pub const SITES: [&str; 4] = ["Mahwah", "Carteret", "Secaucus", "Aurora"];

fn random_quote(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Quote {
    let px = |rng: &mut ChaCha8Rng| Price(rng.random_range(lo..=hi) * 100);
    let (bid, bs) = if rng.random_bool(0.05) { (Price(0), 0) } else { (px(rng), rng.random_range(1..=9) * 100) };
    let (offer, os) = if rng.random_bool(0.05) { (Price(0), 0) } else { (px(rng), rng.random_range(1..=9) * 100) };
    Quote::new(bid, bs, offer, os)
}

/// A time-ordered stream over `symbols` with prices on a narrow cent grid, so
/// feeds often agree, lock, cross and drop sides. About a quarter of events
/// are trades, most of them at a SIP price.
pub fn random_stream(seed: u64, events: usize, symbols: usize, exchanges: usize) -> Vec<FeedEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let syms: Vec<Symbol> = (0..symbols).map(|i| Symbol::new(&format!("S{i}")).unwrap()).collect();
    let xs: Vec<ExchangeId> = VENUES[..exchanges].iter().map(|v| ExchangeId::new(v).unwrap()).collect();
    let mut sip: Vec<Quote> = vec![Quote::EMPTY; symbols];
    let mut ts = 0u64;
    let mut out = Vec::with_capacity(events);
    while out.len() < events {
        ts += rng.random_range(0..3u64);
        let s = rng.random_range(0..symbols);
        let u: f64 = rng.random();
        let ev = if u < 0.45 {
            let x = xs[rng.random_range(0..exchanges)];
            FeedEvent::quote(Timestamp(ts), syms[s], Source::Direct(x), random_quote(&mut rng, 1000, 1004))
        } else if u < 0.75 {
            sip[s] = random_quote(&mut rng, 1000, 1004);
            FeedEvent::quote(Timestamp(ts), syms[s], Source::Sip, sip[s])
        } else {
            let q = sip[s];
            let price = match rng.random_range(0..5) {
                0 | 1 if q.bid.0 > 0 => q.bid,
                2 | 3 if q.offer.0 > 0 => q.offer,
                _ => Price(rng.random_range(1000..=1004) * 100),
            };
            FeedEvent::trade(Timestamp(ts), syms[s], price, rng.random_range(1..=1000))
        };
        out.push(ev);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleTrade {
    pub symbol: Symbol,
    pub seq: u64,
    pub differing: bool,
    pub included: bool,
    pub roc: i128,
}

/// Classifies every trade by replaying, from the start of the stream, every
/// quote for its symbol stamped at or before the trade.
pub fn roc_oracle(events: &[FeedEvent]) -> Vec<OracleTrade> {
    let mut out = Vec::new();
    let mut seq = 0u64;
    for e in events {
        let Payload::Trade(t) = e.payload else { continue };
        let mut sip = Quote::EMPTY;
        let mut direct: BTreeMap<ExchangeId, Quote> = BTreeMap::new();
        for q in events {
            if q.ts > e.ts {
                break;
            }
            if q.symbol != e.symbol {
                continue;
            }
            if let Payload::Quote(qq) = q.payload {
                match q.source {
                    Source::Sip => sip = qq,
                    Source::Direct(x) => {
                        direct.insert(x, qq);
                    }
                }
            }
        }
        let dbid = direct.values().map(|q| q.bid.0).filter(|p| *p > 0).max().unwrap_or(0);
        let doffer = direct.values().map(|q| q.offer.0).filter(|p| *p > 0).min().unwrap_or(0);
        let side_differs = |a: i64, b: i64| a > 0 && b > 0 && a != b;
        let differing = side_differs(sip.bid.0, dbid) || side_differs(sip.offer.0, doffer);
        let at_bid = sip.bid.0 > 0 && t.price == sip.bid;
        let at_offer = sip.offer.0 > 0 && t.price == sip.offer;
        let v = t.volume as i128;
        let (included, roc) = match (differing, at_bid, at_offer) {
            (true, true, false) if dbid > 0 => (true, (dbid - sip.bid.0) as i128 * v),
            (true, false, true) if doffer > 0 => (true, (sip.offer.0 - doffer) as i128 * v),
            _ => (false, 0),
        };
        out.push(OracleTrade { symbol: e.symbol, seq, differing, included, roc });
        seq += 1;
    }
    out.sort_by_key(|t| (t.symbol, t.seq));
    out
}

pub struct MatrixPoint {
    pub exchanges: usize,
    pub symbols: usize,
    pub target_events: f64,
    pub config: SimConfig,
}

/// Simulator configuration `i` of a deterministic test matrix over exchange
/// count (1–8), symbol count (1–20) and size (log-spaced 10³–10⁶ events for
/// `i` in 0..n).
pub fn matrix_point(i: usize, n: usize) -> MatrixPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(1_000 + i as u64);
    let exchanges = 1 + i % 8;
    let symbols = 1 + (i * 7) % 20;
    let exponent = if n > 1 { 3.0 + 3.0 * i as f64 / (n - 1) as f64 } else { 3.0 };
    let target_events = 10f64.powf(exponent);

    let mut links = Vec::new();
    for (a, from) in SITES.iter().enumerate() {
        for (b, to) in SITES.iter().enumerate() {
            let ns = if a == b { rng.random_range(0..10_000) } else { rng.random_range(20_000..400_000) };
            links.push(LinkSpec { from: from.to_string(), to: to.to_string(), ns });
        }
    }
    let topology = TopologyConfig {
        observer: SITES[rng.random_range(0..SITES.len())].into(),
        sip: SipSite { location: SITES[rng.random_range(0..SITES.len())].into(), processing_ns: rng.random_range(0..150_000) },
        exchanges: (0..exchanges)
            .map(|e| ExchangeSite { id: VENUES[e].into(), location: SITES[rng.random_range(0..SITES.len())].into() })
            .collect(),
        links,
        jitter_ns: if i % 3 == 0 { rng.random_range(1..5_000) } else { 0 },
    };
    let quote_rate: f64 = rng.random_range(5.0..60.0);
    let trade_rate = quote_rate * rng.random_range(0.1..0.3);
    // Each quote yields a direct event and, about half the time, a SIP event.
    let per_second = symbols as f64 * (1.5 * quote_rate + trade_rate);
    let session_s = (target_events / per_second).max(1.0);
    let process = QuoteProcessConfig {
        seed: rng.random(),
        date: NaiveDate::from_ymd_opt(2016, 3, 1).unwrap(),
        days: 1,
        session_open_ns: 34_200_000_000_000,
        session_length_ns: (session_s * 1e9) as u64,
        quote_rate_hz: quote_rate,
        trade_rate_hz: trade_rate,
        step_prob: rng.random_range(0.1..0.6),
        spread_weights: vec![0.6, 0.3, 0.1],
        lot_size: 100,
        quote_lots_max: 10,
        trade_lots: [1, 5],
        midpoint_prob: if i % 5 == 2 { 0.2 } else { 0.0 },
        open_close_boost: if i % 4 == 1 { 1.5 } else { 0.0 },
        boost_decay_s: 30.0,
        symbols: (0..symbols)
            .map(|s| SymbolProcess {
                ticker: format!("T{s:02}"),
                initial_mid: rng.random_range(500..20_000) * 100,
                quote_rate_hz: None,
                trade_rate_hz: None,
                max_step_ticks: None,
                spread_weights: None,
                category: None,
                market_cap: None,
                sector: None,
            })
            .collect(),
    };
    let config = SimConfig { topology, process };
    config.validate().expect("matrix configs are valid");
    MatrixPoint { exchanges, symbols, target_events, config }
}
