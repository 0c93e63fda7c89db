//! Message propagation through the exchange → SIP → observer topology.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::Topology;
use crate::book::aggregate;
use crate::model::{FeedEvent, Quote, Source, Symbol, Timestamp, TradeMsg};

/// Something that happened inside one exchange at exchange-local time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalEvent {
    pub ts: u64,
    pub exchange: usize,
    pub kind: LocalKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalKind {
    /// The exchange's new top of book.
    Quote(Quote),
    /// A trade the exchange reports to the consolidated tape.
    Trade(TradeMsg),
}

/// A message as seen by the observer, with its order of dispatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub event: FeedEvent,
    pub seq: u64,
}

impl Delivery {
    pub fn key(&self) -> (Timestamp, Source, u64) {
        (self.event.ts, self.event.source, self.seq)
    }
}

struct Fifo {
    last: u64,
}

impl Fifo {
    /// Arrival no earlier than the previous one on the same link.
    fn arrive(&mut self, at: u64) -> u64 {
        self.last = self.last.max(at);
        self.last
    }
}

/// Observed hop timings of one message, used to narrate scripted scenarios.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HopTimes {
    pub local: u64,
    pub at_sip: u64,
    pub sip_dispatch: u64,
    pub back_at_exchange: u64,
    pub direct_at_observer: u64,
    pub sip_at_observer: Option<u64>,
}

pub struct Propagation {
    /// Observer deliveries in canonical (ts, source, dispatch) order.
    pub deliveries: Vec<Delivery>,
    /// Per local event, in input order.
    pub hops: Vec<HopTimes>,
}

/// Propagates `locals` (sorted by local time) for one symbol.
///
/// At `open` every exchange's `initial` quote and the matching NBBO are
/// delivered as a consistent snapshot. Afterwards each exchange book change
/// reaches the observer directly after one leg, and reaches the SIP after one
/// leg; the SIP applies it after its processing delay and, when NBBO prices
/// change, sends the new NBBO to the observer. Trades follow the SIP path.
pub fn propagate(
    topo: &Topology,
    symbol: Symbol,
    open: u64,
    initial: &[Quote],
    locals: &[LocalEvent],
    mut jitter: Option<&mut ChaCha8Rng>,
) -> Propagation {
    let n = topo.exchanges.len();
    assert_eq!(initial.len(), n, "one initial quote per exchange");
    let mut seq = 0u64;
    let mut out = Vec::with_capacity(locals.len() * 2 + n + 1);
    let mut push = |out: &mut Vec<Delivery>, event: FeedEvent| {
        out.push(Delivery { event, seq });
        seq += 1;
    };

    let mut sip_book: Vec<Quote> = initial.to_vec();
    let mut nbbo = aggregate(sip_book.iter());
    push(&mut out, FeedEvent::quote(Timestamp(open), symbol, Source::Sip, nbbo));
    for (e, q) in initial.iter().enumerate() {
        push(&mut out, FeedEvent::quote(Timestamp(open), symbol, Source::Direct(topo.exchanges[e]), *q));
    }

    let jit = |rng: &mut Option<&mut ChaCha8Rng>| match rng {
        Some(r) if topo.jitter_ns > 0 => r.random_range(0..=topo.jitter_ns),
        _ => 0,
    };
    let mut direct_link: Vec<Fifo> = (0..n).map(|_| Fifo { last: 0 }).collect();
    let mut sip_link: Vec<Fifo> = (0..n).map(|_| Fifo { last: 0 }).collect();
    let mut sip_out = Fifo { last: 0 };
    let mut hops = vec![HopTimes::default(); locals.len()];

    // SIP work queue keyed by (processing time, exchange, local index).
    let mut queue: BinaryHeap<Reverse<(u64, usize, usize)>> = BinaryHeap::with_capacity(locals.len());
    for (i, ev) in locals.iter().enumerate() {
        let e = ev.exchange;
        hops[i].local = ev.ts;
        if let LocalKind::Quote(q) = ev.kind {
            let at = direct_link[e].arrive(ev.ts + topo.to_observer[e] + jit(&mut jitter));
            hops[i].direct_at_observer = at;
            push(&mut out, FeedEvent::quote(Timestamp(at), symbol, Source::Direct(topo.exchanges[e]), q));
        }
        let at_sip = sip_link[e].arrive(ev.ts + topo.to_sip[e] + jit(&mut jitter));
        hops[i].at_sip = at_sip;
        queue.push(Reverse((at_sip + topo.processing_ns, e, i)));
    }

    while let Some(Reverse((now, e, i))) = queue.pop() {
        hops[i].sip_dispatch = now;
        hops[i].back_at_exchange = now + topo.sip_to_exchange[e];
        match locals[i].kind {
            LocalKind::Quote(q) => {
                sip_book[e] = q;
                let next = aggregate(sip_book.iter());
                if !next.same_prices(&nbbo) {
                    let at = sip_out.arrive(now + topo.sip_to_observer + jit(&mut jitter));
                    hops[i].sip_at_observer = Some(at);
                    push(&mut out, FeedEvent::quote(Timestamp(at), symbol, Source::Sip, next));
                }
                nbbo = next;
            }
            LocalKind::Trade(t) => {
                let at = sip_out.arrive(now + topo.sip_to_observer + jit(&mut jitter));
                hops[i].sip_at_observer = Some(at);
                push(&mut out, FeedEvent::trade(Timestamp(at), symbol, t.price, t.volume));
            }
        }
    }
    out.sort_by_key(Delivery::key);
    Propagation { deliveries: out, hops }
}
