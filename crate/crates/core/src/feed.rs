//! Line-oriented event files and symbol metadata.
//!
//! Record grammar, one event per LF-terminated line:
//!
//! ```text
//! Q,<ts_ns>,<symbol>,<source>,<bid_1e-4usd>,<bid_shares>,<offer_1e-4usd>,<offer_shares>
//! T,<ts_ns>,<symbol>,SIP,<price_1e-4usd>,<shares>
//! ```
//!
//! `<source>` is `SIP` or `D:<EXCH>`. An absent quote side is `0,0`. A file may
//! start with a header line `#DISLOC-EVENTS v1 date=YYYY-MM-DD symbols=N`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{FeedError, ParseError};
use crate::model::{
    validate_event, Category, ExchangeId, FeedEvent, Payload, Price, Quote, Source, Symbol, SymbolMeta, Timestamp,
    TradeMsg,
};

pub const FORMAT_VERSION: u32 = 1;
const HEADER_TAG: &str = "#DISLOC-EVENTS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventFileHeader {
    pub version: u32,
    pub date: NaiveDate,
    pub symbols: u32,
}

impl EventFileHeader {
    pub fn new(date: NaiveDate, symbols: u32) -> Self {
        EventFileHeader { version: FORMAT_VERSION, date, symbols }
    }

    pub fn render(&self) -> String {
        format!("{HEADER_TAG} v{} date={} symbols={}", self.version, self.date.format("%Y-%m-%d"), self.symbols)
    }

    pub fn parse(line: &str) -> Result<Self, String> {
        let mut parts = line.split(' ');
        if parts.next() != Some(HEADER_TAG) {
            return Err(format!("expected header tag {HEADER_TAG}"));
        }
        let version = parts
            .next()
            .and_then(|v| v.strip_prefix('v'))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or("missing version")?;
        if version != FORMAT_VERSION {
            return Err(format!("unsupported format version {version}"));
        }
        let date = parts
            .next()
            .and_then(|v| v.strip_prefix("date="))
            .and_then(|v| NaiveDate::parse_from_str(v, "%Y-%m-%d").ok())
            .ok_or("missing or invalid date")?;
        let symbols = parts
            .next()
            .and_then(|v| v.strip_prefix("symbols="))
            .and_then(|v| v.parse::<u32>().ok())
            .ok_or("missing or invalid symbols count")?;
        if parts.next().is_some() {
            return Err("trailing header fields".into());
        }
        Ok(EventFileHeader { version, date, symbols })
    }
}

struct Fields<'a> {
    line: &'a str,
    pos: usize,
}

impl<'a> Fields<'a> {
    fn next(&mut self, field: &'static str) -> Result<(&'a str, usize), ParseError> {
        if self.pos > self.line.len() {
            return Err(ParseError { field, offset: self.line.len(), message: "missing field".into() });
        }
        let start = self.pos;
        let rest = &self.line[start..];
        let end = rest.find(',').map_or(self.line.len(), |i| start + i);
        self.pos = end + 1;
        Ok((&self.line[start..end], start))
    }

    fn uint(&mut self, field: &'static str) -> Result<u64, ParseError> {
        let (s, offset) = self.next(field)?;
        parse_uint(s).ok_or_else(|| ParseError { field, offset, message: "not an integer".into() })
    }

    fn price(&mut self, field: &'static str) -> Result<Price, ParseError> {
        let (s, offset) = self.next(field)?;
        parse_uint(s)
            .and_then(|v| i64::try_from(v).ok())
            .map(Price)
            .ok_or_else(|| ParseError { field, offset, message: "not an integer".into() })
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos <= self.line.len() {
            return Err(ParseError { field: "record", offset: self.pos - 1, message: "trailing fields".into() });
        }
        Ok(())
    }
}

fn parse_uint(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 20 {
        return None;
    }
    let mut v: u64 = 0;
    for b in s.bytes() {
        if !b.is_ascii_digit() {
            return None;
        }
        v = v.checked_mul(10)?.checked_add(u64::from(b - b'0'))?;
    }
    Some(v)
}

/// Decodes one event record (without its line terminator).
pub fn parse_event(line: &str) -> Result<FeedEvent, ParseError> {
    let mut f = Fields { line, pos: 0 };
    let (kind, kind_off) = f.next("kind")?;
    let ts = Timestamp(f.uint("ts")?);
    let (sym, sym_off) = f.next("symbol")?;
    let symbol =
        Symbol::new(sym).map_err(|e| ParseError { field: "symbol", offset: sym_off, message: e.to_string() })?;
    let (src, src_off) = f.next("source")?;
    let source = if src == "SIP" {
        Source::Sip
    } else if let Some(x) = src.strip_prefix("D:") {
        let id = ExchangeId::new(x)
            .map_err(|e| ParseError { field: "source", offset: src_off, message: e.to_string() })?;
        Source::Direct(id)
    } else {
        return Err(ParseError { field: "source", offset: src_off, message: format!("unknown source tag {src:?}") });
    };
    let payload = match kind {
        "Q" => {
            let bid = f.price("bid")?;
            let bid_size = f.uint("bid_size")?;
            let offer = f.price("offer")?;
            let offer_size = f.uint("offer_size")?;
            Payload::Quote(Quote { bid, bid_size, offer, offer_size })
        }
        "T" => {
            if source != Source::Sip {
                return Err(ParseError { field: "source", offset: src_off, message: "trades must carry SIP".into() });
            }
            let price = f.price("price")?;
            let volume = f.uint("shares")?;
            Payload::Trade(TradeMsg { price, volume })
        }
        other => {
            return Err(ParseError { field: "kind", offset: kind_off, message: format!("unknown record kind {other:?}") })
        }
    };
    f.finish()?;
    Ok(FeedEvent { ts, symbol, source, payload })
}

/// Appends the record for `e` (no line terminator).
pub fn format_event_into(out: &mut String, e: &FeedEvent) {
    match e.payload {
        Payload::Quote(q) => {
            let _ = write!(
                out,
                "Q,{},{},{},{},{},{},{}",
                e.ts.0, e.symbol, e.source, q.bid.0, q.bid_size, q.offer.0, q.offer_size
            );
        }
        Payload::Trade(t) => {
            let _ = write!(out, "T,{},{},{},{},{}", e.ts.0, e.symbol, e.source, t.price.0, t.volume);
        }
    }
}

pub fn format_event(e: &FeedEvent) -> String {
    let mut s = String::with_capacity(64);
    format_event_into(&mut s, e);
    s
}

/// Writes a header (when given) and LF-terminated records.
pub fn write_events<'a, W: Write>(
    mut w: W,
    header: Option<&EventFileHeader>,
    events: impl IntoIterator<Item = &'a FeedEvent>,
) -> io::Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.render())?;
    }
    let mut line = String::with_capacity(64);
    for e in events {
        line.clear();
        format_event_into(&mut line, e);
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub fn write_event_file(path: &Path, header: Option<&EventFileHeader>, events: &[FeedEvent]) -> Result<(), FeedError> {
    let file = File::create(path).map_err(|e| FeedError::io(path, e))?;
    write_events(io::BufWriter::with_capacity(1 << 20, file), header, events).map_err(|e| FeedError::io(path, e))
}

/// Streaming reader over one event file; enforces ts order and event validity.
pub struct EventReader<R> {
    inner: R,
    path: PathBuf,
    buf: Vec<u8>,
    line: u64,
    prev_ts: Option<Timestamp>,
    header: Option<EventFileHeader>,
    pending: Option<FeedEvent>,
    failed: bool,
}

impl EventReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, FeedError> {
        let file = File::open(path).map_err(|e| FeedError::io(path, e))?;
        EventReader::new(BufReader::with_capacity(1 << 20, file), path)
    }
}

impl<R: BufRead> EventReader<R> {
    /// Consumes the optional header line immediately.
    pub fn new(inner: R, path: impl Into<PathBuf>) -> Result<Self, FeedError> {
        let mut r = EventReader {
            inner,
            path: path.into(),
            buf: Vec::with_capacity(128),
            line: 0,
            prev_ts: None,
            header: None,
            pending: None,
            failed: false,
        };
        if let Some(text) = r.read_line()? {
            if text.starts_with('#') {
                let header = EventFileHeader::parse(&text)
                    .map_err(|message| FeedError::Header { path: r.path.clone(), line: r.line, message })?;
                r.header = Some(header);
            } else {
                r.pending = Some(r.decode(&text)?);
            }
        }
        Ok(r)
    }

    pub fn header(&self) -> Option<&EventFileHeader> {
        self.header.as_ref()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn read_line(&mut self) -> Result<Option<String>, FeedError> {
        self.buf.clear();
        let n = self.inner.read_until(b'\n', &mut self.buf).map_err(|e| FeedError::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        match std::str::from_utf8(&self.buf) {
            Ok(s) => Ok(Some(s.to_owned())),
            Err(e) => Err(FeedError::Parse {
                path: self.path.clone(),
                line: self.line,
                error: ParseError { field: "record", offset: e.valid_up_to(), message: "invalid UTF-8".into() },
            }),
        }
    }

    fn decode(&mut self, text: &str) -> Result<FeedEvent, FeedError> {
        let ev = parse_event(text).map_err(|error| FeedError::Parse { path: self.path.clone(), line: self.line, error })?;
        if let Some(message) = validate_event(&ev) {
            return Err(FeedError::Invalid { path: self.path.clone(), line: self.line, message });
        }
        if let Some(prev) = self.prev_ts {
            if ev.ts < prev {
                return Err(FeedError::Unsorted { path: self.path.clone(), line: self.line, ts: ev.ts.0, prev: prev.0 });
            }
        }
        self.prev_ts = Some(ev.ts);
        Ok(ev)
    }

    fn next_event(&mut self) -> Result<Option<FeedEvent>, FeedError> {
        if let Some(ev) = self.pending.take() {
            self.prev_ts = Some(ev.ts);
            return Ok(Some(ev));
        }
        self.buf.clear();
        let n = self.inner.read_until(b'\n', &mut self.buf).map_err(|e| FeedError::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        let buf = std::mem::take(&mut self.buf);
        let res = match std::str::from_utf8(&buf) {
            Ok(text) => self.decode(text),
            Err(e) => Err(FeedError::Parse {
                path: self.path.clone(),
                line: self.line,
                error: ParseError { field: "record", offset: e.valid_up_to(), message: "invalid UTF-8".into() },
            }),
        };
        self.buf = buf;
        res.map(Some)
    }
}

impl<R: BufRead> Iterator for EventReader<R> {
    type Item = Result<FeedEvent, FeedError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_event() {
            Ok(Some(ev)) => Some(Ok(ev)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Parses a whole in-memory event file.
pub fn read_events<R: Read>(input: R, name: &str) -> Result<(Option<EventFileHeader>, Vec<FeedEvent>), FeedError> {
    let mut r = EventReader::new(BufReader::new(input), name)?;
    let header = r.header().copied();
    let events = r.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((header, events))
}

struct Head {
    ev: FeedEvent,
    file: usize,
}

impl Head {
    fn key(&self) -> (Timestamp, Source, usize) {
        (self.ev.ts, self.ev.source, self.file)
    }
}

impl PartialEq for Head {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Head {}
impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// K-way merge of individually ts-sorted event sources into one stream
/// ordered by (ts, SIP before DIRECT, exchange id, file order).
///
/// Holds one buffered event per input.
pub struct MergedStream<I> {
    inputs: Vec<I>,
    heap: BinaryHeap<Reverse<Head>>,
    primed: bool,
    failed: bool,
}

impl<I> MergedStream<I>
where
    I: Iterator<Item = Result<FeedEvent, FeedError>>,
{
    pub fn new(inputs: Vec<I>) -> Self {
        let n = inputs.len();
        MergedStream { inputs, heap: BinaryHeap::with_capacity(n), primed: false, failed: false }
    }

    fn pull(&mut self, file: usize) -> Result<(), FeedError> {
        if let Some(next) = self.inputs[file].next() {
            self.heap.push(Reverse(Head { ev: next?, file }));
        }
        Ok(())
    }

    fn advance(&mut self) -> Result<Option<FeedEvent>, FeedError> {
        if !self.primed {
            self.primed = true;
            for file in 0..self.inputs.len() {
                self.pull(file)?;
            }
        }
        let Some(Reverse(head)) = self.heap.pop() else {
            return Ok(None);
        };
        self.pull(head.file)?;
        Ok(Some(head.ev))
    }
}

impl<I> Iterator for MergedStream<I>
where
    I: Iterator<Item = Result<FeedEvent, FeedError>>,
{
    type Item = Result<FeedEvent, FeedError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.advance() {
            Ok(ev) => ev.map(Ok),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Opened event files plus their merged view.
pub struct EventFiles {
    pub headers: Vec<Option<EventFileHeader>>,
    pub stream: MergedStream<EventReader<BufReader<File>>>,
}

/// Opens every path and returns the merged stream.
pub fn merged_stream(paths: &[PathBuf]) -> Result<EventFiles, FeedError> {
    let readers = paths.iter().map(|p| EventReader::open(p)).collect::<Result<Vec<_>, _>>()?;
    let headers = readers.iter().map(|r| r.header().copied()).collect();
    Ok(EventFiles { headers, stream: MergedStream::new(readers) })
}

/// Loads `ticker,market_cap,sector,category` rows keyed by ticker.
pub fn load_symbol_meta(path: &Path) -> Result<BTreeMap<Symbol, SymbolMeta>, FeedError> {
    let file = File::open(path).map_err(|e| FeedError::io(path, e))?;
    parse_symbol_meta(file, path)
}

pub fn parse_symbol_meta<R: Read>(input: R, path: &Path) -> Result<BTreeMap<Symbol, SymbolMeta>, FeedError> {
    let meta_err = |line: u64, message: String| FeedError::Meta { path: path.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| meta_err(1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["ticker", "market_cap", "sector", "category"] {
        return Err(meta_err(1, "header must be ticker,market_cap,sector,category".into()));
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| meta_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let ticker = Symbol::new(&rec[0]).map_err(|e| meta_err(line, e.to_string()))?;
        let market_cap = match rec[1].trim() {
            "" => None,
            s => match s.parse::<u64>() {
                Ok(v) if v > 0 => Some(v),
                _ => return Err(meta_err(line, format!("market_cap must be a positive integer, got {s:?}"))),
            },
        };
        let category: Category = rec[3].parse().map_err(|e: crate::error::ModelError| meta_err(line, e.to_string()))?;
        let meta = SymbolMeta { ticker, market_cap, sector: rec[2].to_string(), category };
        if out.insert(ticker, meta).is_some() {
            return Err(meta_err(line, format!("duplicate ticker {ticker}")));
        }
    }
    Ok(out)
}

pub fn write_symbol_meta<W: Write>(w: W, metas: &BTreeMap<Symbol, SymbolMeta>) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["ticker", "market_cap", "sector", "category"])?;
    for m in metas.values() {
        let mc = m.market_cap.map(|v| v.to_string()).unwrap_or_default();
        wtr.write_record([m.ticker.as_str(), &mc, &m.sector, m.category.tag()])?;
    }
    wtr.flush()?;
    Ok(())
}
