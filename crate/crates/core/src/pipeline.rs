//! Single-pass detection and ROC over a merged event stream.
//!
//! Events sharing a timestamp are simultaneous: per symbol, the detector is
//! stepped once per distinct timestamp, after every quote at that instant has
//! been applied, and trades are classified against that settled state. Merge
//! tie-breaks among equal timestamps therefore cannot create or split segments.

use std::collections::HashMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::book::SymbolBook;
use crate::detect::{Detector, DislocationSegment};
use crate::error::{DetectError, FeedError, PipelineError};
use crate::feed::{merged_stream, EventFileHeader};
use crate::model::{FeedEvent, Payload, Source, Symbol, Timestamp, TradeMsg};
use crate::roc::{classify_trade, RocRecord};

struct SymbolState {
    book: SymbolBook,
    detector: Detector,
    /// Trades at `clock`, classified once the instant is complete.
    pending: Vec<(u64, TradeMsg)>,
    clock: Timestamp,
    /// Prices changed at `clock` and the detector has not seen them yet.
    dirty: bool,
}

impl SymbolState {
    fn new(symbol: Symbol) -> Self {
        SymbolState { book: SymbolBook::new(), detector: Detector::new(symbol), pending: Vec::new(), clock: Timestamp(0), dirty: false }
    }

    /// Closes the current instant: steps the detector, then classifies its trades.
    fn settle(&mut self, segments: &mut Vec<DislocationSegment>, records: &mut Vec<RocRecord>) -> Result<(), DetectError> {
        if self.dirty {
            self.dirty = false;
            let (sip, dbbo) = (*self.book.sip(), *self.book.dbbo());
            self.detector.step(self.clock, &sip, &dbbo, segments)?;
        }
        let dislocated = self.detector.is_dislocated();
        let symbol = self.detector.symbol();
        for (seq, t) in self.pending.drain(..) {
            records.push(classify_trade(symbol, self.clock, seq, &t, self.book.sip(), self.book.dbbo(), dislocated));
        }
        Ok(())
    }
}

/// Streaming engine; feed events in merged order, then call [`Engine::finish`].
#[derive(Default)]
pub struct Engine {
    index: HashMap<Symbol, usize>,
    states: Vec<SymbolState>,
    segments: Vec<DislocationSegment>,
    records: Vec<RocRecord>,
    trades_seen: u64,
    events: u64,
    last_ts: Timestamp,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineOutput {
    /// Sorted by (symbol, side, start).
    pub segments: Vec<DislocationSegment>,
    /// Sorted by (symbol, stream position).
    pub records: Vec<RocRecord>,
    pub events: u64,
    pub session_end: Timestamp,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ev: &FeedEvent) -> Result<(), DetectError> {
        let seq = match ev.payload {
            Payload::Trade(_) => {
                self.trades_seen += 1;
                self.trades_seen - 1
            }
            Payload::Quote(_) => 0,
        };
        self.push_with_seq(ev, seq)
    }

    fn push_with_seq(&mut self, ev: &FeedEvent, seq: u64) -> Result<(), DetectError> {
        self.events += 1;
        self.last_ts = self.last_ts.max(ev.ts);
        let idx = match self.index.get(&ev.symbol) {
            Some(&i) => i,
            None => {
                self.states.push(SymbolState::new(ev.symbol));
                self.index.insert(ev.symbol, self.states.len() - 1);
                self.states.len() - 1
            }
        };
        let st = &mut self.states[idx];
        if ev.ts < st.clock {
            return Err(DetectError::TimestampRegression { symbol: ev.symbol, ts: ev.ts, prev: st.clock });
        }
        if ev.ts > st.clock {
            st.settle(&mut self.segments, &mut self.records)?;
            st.clock = ev.ts;
        }
        let update = match (ev.payload, ev.source) {
            (Payload::Trade(t), _) => {
                st.pending.push((seq, t));
                return Ok(());
            }
            (Payload::Quote(q), Source::Sip) => st.book.apply_sip_quote(q, ev.ts),
            (Payload::Quote(q), Source::Direct(x)) => st.book.apply_direct_quote(x, q, ev.ts),
        };
        st.dirty |= update.prices_changed;
        Ok(())
    }

    /// Flushes pending trades and closes open segments at `session_end`
    /// (default: the last event timestamp).
    pub fn finish(mut self, session_end: Option<Timestamp>) -> Result<PipelineOutput, DetectError> {
        let end = session_end.unwrap_or(self.last_ts);
        for st in &mut self.states {
            st.settle(&mut self.segments, &mut self.records)?;
            st.detector.finalize(end, &mut self.segments)?;
        }
        self.segments.sort_by_key(|s| s.sort_key());
        self.records.sort_by_key(|r| (r.symbol, r.seq));
        Ok(PipelineOutput { segments: self.segments, records: self.records, events: self.events, session_end: end })
    }
}

/// Runs the engine over in-memory events that are already in merged order.
pub fn run_events<'a>(
    events: impl IntoIterator<Item = &'a FeedEvent>,
    session_end: Option<Timestamp>,
) -> Result<PipelineOutput, DetectError> {
    let mut engine = Engine::new();
    for ev in events {
        engine.push(ev)?;
    }
    engine.finish(session_end)
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub session_end: Option<Timestamp>,
    /// Symbol-level parallelism; output is identical for any value.
    pub threads: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { session_end: None, threads: 1 }
    }
}

/// Session date shared by all headers, or `None` if no file carries one.
pub fn session_date(headers: &[Option<EventFileHeader>]) -> Result<Option<NaiveDate>, PipelineError> {
    let mut date = None;
    for h in headers.iter().flatten() {
        match date {
            None => date = Some(h.date),
            Some(d) if d != h.date => {
                return Err(PipelineError::Input(format!("event files disagree on session date: {d} vs {}", h.date)))
            }
            _ => {}
        }
    }
    Ok(date)
}

pub struct FileRun {
    pub output: PipelineOutput,
    pub date: Option<NaiveDate>,
}

/// Merges `paths` and runs detection + ROC.
pub fn run_files(paths: &[PathBuf], opts: &PipelineOptions) -> Result<FileRun, PipelineError> {
    let files = merged_stream(paths)?;
    let date = session_date(&files.headers)?;
    let output = if opts.threads <= 1 {
        let mut engine = Engine::new();
        for ev in files.stream {
            engine.push(&ev?)?;
        }
        engine.finish(opts.session_end)?
    } else {
        run_partitioned(files.stream, opts)?
    };
    Ok(FileRun { output, date })
}

fn run_partitioned(
    stream: impl Iterator<Item = Result<FeedEvent, FeedError>>,
    opts: &PipelineOptions,
) -> Result<PipelineOutput, PipelineError> {
    let mut index: HashMap<Symbol, usize> = HashMap::new();
    let mut parts: Vec<Vec<(u64, FeedEvent)>> = Vec::new();
    let mut trades = 0u64;
    let mut last = Timestamp(0);
    let mut events = 0u64;
    for ev in stream {
        let ev = ev?;
        events += 1;
        last = last.max(ev.ts);
        let seq = if ev.is_trade() {
            trades += 1;
            trades - 1
        } else {
            0
        };
        let i = *index.entry(ev.symbol).or_insert_with(|| {
            parts.push(Vec::new());
            parts.len() - 1
        });
        parts[i].push((seq, ev));
    }
    let end = opts.session_end.unwrap_or(last);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| PipelineError::Input(format!("thread pool: {e}")))?;
    let outs: Vec<Result<PipelineOutput, DetectError>> = pool.install(|| {
        parts
            .par_iter()
            .map(|part| {
                let mut engine = Engine::new();
                for (seq, ev) in part {
                    engine.push_with_seq(ev, *seq)?;
                }
                engine.finish(Some(end))
            })
            .collect()
    });
    let mut merged = PipelineOutput { events, session_end: end, ..Default::default() };
    for out in outs {
        let out = out?;
        merged.segments.extend(out.segments);
        merged.records.extend(out.records);
    }
    merged.segments.sort_by_key(|s| s.sort_key());
    merged.records.sort_by_key(|r| (r.symbol, r.seq));
    Ok(merged)
}
