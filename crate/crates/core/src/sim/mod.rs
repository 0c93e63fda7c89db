//! Discrete-event simulator of exchanges, a SIP and one observer.
//!
//! Each symbol gets its own ChaCha8 generator seeded from `(seed, day)` and
//! placed on a stream derived from the ticker (FNV-1a), so a symbol's output
//! does not depend on which other symbols are configured.

pub mod config;
pub mod figure2;
pub mod network;
pub mod process;
pub mod truth;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detect::{write_segments, DislocationSegment};
use crate::error::SimError;
use crate::feed::{write_event_file, EventFileHeader};
use crate::model::{Category, ExchangeId, FeedEvent, Source, Symbol, SymbolMeta, Timestamp};
pub use config::{SimConfig, Topology};
pub use figure2::{replay_figure2, Figure2};
pub use truth::ground_truth;

const JITTER_SALT: u64 = 0x6a09_e667_f3bc_c908;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ *b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator for one symbol-day; `salt` separates independent uses.
pub fn symbol_rng(seed: u64, day: u32, ticker: &str, salt: u64) -> ChaCha8Rng {
    let key = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (day as u64).rotate_left(32) ^ salt;
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(fnv1a(ticker.as_bytes()));
    rng
}

/// Symbol table for the configured symbols; unspecified categories are `OTHER`.
pub fn symbol_meta(cfg: &SimConfig) -> BTreeMap<Symbol, SymbolMeta> {
    cfg.process
        .symbols
        .iter()
        .map(|s| {
            let ticker = Symbol::new(&s.ticker).expect("validated ticker");
            let meta = SymbolMeta {
                ticker,
                market_cap: s.market_cap,
                sector: s.sector.clone().unwrap_or_default(),
                category: s.category.unwrap_or(Category::Other),
            };
            (ticker, meta)
        })
        .collect()
}

/// `n` consecutive weekdays starting at `first` (or the next weekday after it).
pub fn session_dates(first: NaiveDate, n: u32) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n as usize);
    let mut d = first;
    while out.len() < n as usize {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

#[derive(Clone, Debug)]
pub struct DayOutput {
    pub date: NaiveDate,
    pub symbols: Vec<Symbol>,
    /// SIP quotes and trades, sorted by (ts, symbol, dispatch order).
    pub sip: Vec<FeedEvent>,
    pub direct: BTreeMap<ExchangeId, Vec<FeedEvent>>,
    pub truth: Vec<DislocationSegment>,
    /// Last observer delivery of the day.
    pub session_end: Timestamp,
}

#[derive(Clone, Debug)]
pub struct WrittenDay {
    pub dir: PathBuf,
    pub event_files: Vec<PathBuf>,
    pub truth: PathBuf,
}

impl DayOutput {
    pub fn event_count(&self) -> usize {
        self.sip.len() + self.direct.values().map(Vec::len).sum::<usize>()
    }

    /// All events in the order the feed merge would produce.
    pub fn merged(&self) -> Vec<FeedEvent> {
        let mut all: Vec<FeedEvent> = Vec::with_capacity(self.event_count());
        all.extend(&self.sip);
        for evs in self.direct.values() {
            all.extend(evs);
        }
        // Stable: preserves per-file order among equal keys.
        all.sort_by_key(|e| (e.ts, e.source));
        all
    }

    /// Writes `<root>/<date>/{sip.events, direct_<EXCH>.events, ground_truth.csv}`.
    pub fn write(&self, root: &Path) -> Result<WrittenDay, SimError> {
        let dir = root.join(self.date.format("%Y-%m-%d").to_string());
        let io = |path: &Path, source| SimError::Io { path: path.to_path_buf(), source };
        fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        let header = EventFileHeader::new(self.date, self.symbols.len() as u32);
        let feed_err = |e: crate::error::FeedError| SimError::Config(e.to_string());
        let mut event_files = Vec::new();
        let sip = dir.join("sip.events");
        write_event_file(&sip, Some(&header), &self.sip).map_err(feed_err)?;
        event_files.push(sip);
        for (x, evs) in &self.direct {
            let p = dir.join(format!("direct_{x}.events"));
            write_event_file(&p, Some(&header), evs).map_err(feed_err)?;
            event_files.push(p);
        }
        let truth = dir.join("ground_truth.csv");
        let f = fs::File::create(&truth).map_err(|e| io(&truth, e))?;
        write_segments(std::io::BufWriter::new(f), &self.truth).map_err(|e| io(&truth, e))?;
        Ok(WrittenDay { dir, event_files, truth })
    }
}

struct SymbolOutput {
    deliveries: Vec<network::Delivery>,
    truth: Vec<DislocationSegment>,
}

fn simulate_symbol(cfg: &SimConfig, topo: &Topology, day: u32, s: &config::SymbolProcess) -> SymbolOutput {
    let p = &cfg.process;
    let symbol = Symbol::new(&s.ticker).expect("validated ticker");
    let mut rng = symbol_rng(p.seed, day, &s.ticker, 0);
    let sd = process::generate(p, s, topo.exchanges.len(), &mut rng);
    let mut jitter_rng = symbol_rng(p.seed, day, &s.ticker, JITTER_SALT);
    let jitter = (topo.jitter_ns > 0).then_some(&mut jitter_rng);
    let prop = network::propagate(topo, symbol, p.session_open_ns, &sd.initial, &sd.locals, jitter);
    SymbolOutput { deliveries: prop.deliveries, truth: Vec::new() }
}

/// Runs every configured day. Output is a pure function of `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<DayOutput>, SimError> {
    cfg.validate()?;
    let topo = Topology::resolve(&cfg.topology)?;
    let dates = session_dates(cfg.process.date, cfg.process.days);
    Ok(dates.into_iter().enumerate().map(|(day, date)| simulate_day(cfg, &topo, day as u32, date)).collect())
}

fn simulate_day(cfg: &SimConfig, topo: &Topology, day: u32, date: NaiveDate) -> DayOutput {
    let mut per_symbol: Vec<(Symbol, SymbolOutput)> = cfg
        .process
        .symbols
        .par_iter()
        .map(|s| (Symbol::new(&s.ticker).expect("validated ticker"), simulate_symbol(cfg, topo, day, s)))
        .collect();
    per_symbol.sort_by_key(|(sym, _)| *sym);

    let session_end = per_symbol
        .iter()
        .filter_map(|(_, o)| o.deliveries.last().map(|d| d.event.ts))
        .max()
        .unwrap_or(Timestamp(cfg.process.session_open_ns));

    // Truth needs the common session end, so it is computed after all symbols ran.
    per_symbol.par_iter_mut().for_each(|(_, o)| {
        let evs: Vec<FeedEvent> = o.deliveries.iter().map(|d| d.event).collect();
        o.truth = ground_truth(&evs, session_end);
    });

    let mut sip: Vec<(Timestamp, Symbol, u64, FeedEvent)> = Vec::new();
    let mut direct: BTreeMap<ExchangeId, Vec<(Timestamp, Symbol, u64, FeedEvent)>> =
        topo.exchanges.iter().map(|x| (*x, Vec::new())).collect();
    let mut truth = Vec::new();
    for (sym, o) in per_symbol.iter_mut() {
        for d in &o.deliveries {
            let row = (d.event.ts, *sym, d.seq, d.event);
            match d.event.source {
                Source::Sip => sip.push(row),
                Source::Direct(x) => direct.get_mut(&x).expect("known exchange").push(row),
            }
        }
        truth.append(&mut o.truth);
    }
    let finish = |mut rows: Vec<(Timestamp, Symbol, u64, FeedEvent)>| {
        rows.sort_by_key(|r| (r.0, r.1, r.2));
        rows.into_iter().map(|r| r.3).collect::<Vec<_>>()
    };
    truth.sort_by_key(|s| s.sort_key());
    DayOutput {
        date,
        symbols: per_symbol.iter().map(|(s, _)| *s).collect(),
        sip: finish(sip),
        direct: direct.into_iter().map(|(x, rows)| (x, finish(rows))).collect(),
        truth,
        session_end,
    }
}
