//! The two-exchange scenario: NYSE and the SIP in Mahwah, Nasdaq and the
//! observer in Carteret, one NYSE bid improvement.

use super::config::{ExchangeSite, LinkSpec, SipSite, Topology, TopologyConfig, DEFAULT_OPEN_NS};
use super::network::{propagate, HopTimes, LocalEvent, LocalKind};
use super::truth::ground_truth;
use crate::detect::DislocationSegment;
use crate::model::{FeedEvent, Price, Quote, Symbol, Timestamp};

pub const MAHWAH_TO_CARTERET_NS: u64 = 282_000;
pub const MAHWAH_LOCAL_NS: u64 = 5_000;
pub const SIP_PROCESSING_NS: u64 = 92_000;
/// Local time of the NYSE bid improvement, after the open.
pub const IMPROVEMENT_AFTER_OPEN_NS: u64 = 1_000_000;

pub fn topology_config() -> TopologyConfig {
    let site = |id: &str, location: &str| ExchangeSite { id: id.into(), location: location.into() };
    let link = |from: &str, to: &str, ns| LinkSpec { from: from.into(), to: to.into(), ns };
    TopologyConfig {
        observer: "Carteret".into(),
        sip: SipSite { location: "Mahwah".into(), processing_ns: SIP_PROCESSING_NS },
        exchanges: vec![site("NYSE", "Mahwah"), site("NASD", "Carteret")],
        links: vec![link("Mahwah", "Carteret", MAHWAH_TO_CARTERET_NS), link("Mahwah", "Mahwah", MAHWAH_LOCAL_NS)],
        jitter_ns: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: u8,
    /// Nanoseconds after the NYSE update.
    pub offset_ns: u64,
    pub what: &'static str,
}

#[derive(Clone, Debug)]
pub struct Figure2 {
    pub topology: Topology,
    /// Observer events in canonical order.
    pub events: Vec<FeedEvent>,
    pub expected: DislocationSegment,
    pub trace: Vec<TraceStep>,
}

pub fn replay_figure2() -> Figure2 {
    let topology = Topology::resolve(&topology_config()).expect("static topology");
    let symbol = Symbol::new("AAPL").expect("static symbol");
    let harmony = Quote::new(Price::from_cents(1000), 100, Price::from_cents(1002), 100);
    let improved = Quote { bid: Price::from_cents(1001), ..harmony };
    let t0 = DEFAULT_OPEN_NS + IMPROVEMENT_AFTER_OPEN_NS;
    let locals = [LocalEvent { ts: t0, exchange: 0, kind: LocalKind::Quote(improved) }];
    let prop = propagate(&topology, symbol, DEFAULT_OPEN_NS, &[harmony, harmony], &locals, None);
    let events: Vec<FeedEvent> = prop.deliveries.iter().map(|d| d.event).collect();
    let h: HopTimes = prop.hops[0];
    let sip_seen = h.sip_at_observer.expect("bid improvement changes the NBBO");

    let trace = vec![
        TraceStep { step: 0, offset_ns: 0, what: "all feeds agree: 10.00 x 10.02 everywhere" },
        TraceStep { step: 1, offset_ns: 0, what: "NYSE raises its bid to 10.01 and sends it to the SIP and to direct subscribers" },
        TraceStep { step: 2, offset_ns: h.at_sip - t0, what: "update reaches the SIP in Mahwah" },
        TraceStep { step: 3, offset_ns: h.sip_dispatch - t0, what: "SIP has recomputed the NBBO and dispatches it" },
        TraceStep { step: 4, offset_ns: h.direct_at_observer - t0, what: "direct update reaches Carteret; DBBO bid leads the SIP bid by 1 cent" },
        TraceStep { step: 5, offset_ns: sip_seen - t0, what: "SIP update reaches Carteret; feeds agree again" },
    ];
    let expected = DislocationSegment {
        symbol,
        side: crate::detect::Side::Bid,
        ordering: crate::detect::FeedOrder::F1Less,
        start: Timestamp(h.direct_at_observer),
        end: Timestamp(sip_seen),
        min_magnitude: Price::from_cents(1),
        max_magnitude: Price::from_cents(1),
        truncated: false,
    };
    debug_assert_eq!(ground_truth(&events, Timestamp(sip_seen)), vec![expected]);
    Figure2 { topology, events, expected, trace }
}
