//! Shared market-data types: fixed-point prices, session timestamps, quotes,
//! trades and the feed event envelope.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayString;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Price units per USD (prices are carried in 10⁻⁴ USD).
pub const PRICE_SCALE: i64 = 10_000;
/// One cent in price units.
pub const CENT: i64 = 100;
/// Nanoseconds in one calendar day.
pub const NANOS_PER_DAY: u64 = 86_400_000_000_000;

/// Share count.
pub type Shares = u64;

/// Fixed-point price in 10⁻⁴ USD. Zero on a quote side means "no quote".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(pub i64);

impl Price {
    pub const ZERO: Price = Price(0);

    pub const fn from_units(units: i64) -> Self {
        Price(units)
    }

    pub const fn from_cents(cents: i64) -> Self {
        Price(cents * CENT)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    pub fn is_present(self) -> bool {
        self.0 > 0
    }

    pub fn to_usd(self) -> f64 {
        self.0 as f64 / PRICE_SCALE as f64
    }
}

impl fmt::Display for Price {
    /// Renders as a decimal USD amount with exactly four fractional digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let scale = PRICE_SCALE as u64;
        write!(f, "{sign}{}.{:04}", abs / scale, abs % scale)
    }
}

impl FromStr for Price {
    type Err = ModelError;

    /// Parses a decimal USD amount with at most four fractional digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadPrice(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || frac.len() > 4 {
            return Err(bad());
        }
        if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i64 = whole.parse().map_err(|_| bad())?;
        let mut frac_units: i64 = 0;
        for (i, b) in frac.bytes().enumerate() {
            frac_units += i64::from(b - b'0') * 10_i64.pow(3 - i as u32);
        }
        let units = whole
            .checked_mul(PRICE_SCALE)
            .and_then(|w| w.checked_add(frac_units))
            .ok_or_else(bad)?;
        Ok(Price(if neg { -units } else { units }))
    }
}

/// Nanoseconds since session midnight on the observer clock.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const fn from_nanos(nanos: u64) -> Self {
        Timestamp(nanos)
    }

    pub const fn from_micros(micros: u64) -> Self {
        Timestamp(micros * 1_000)
    }

    pub const fn from_secs(secs: u64) -> Self {
        Timestamp(secs * 1_000_000_000)
    }

    pub const fn nanos(self) -> u64 {
        self.0
    }

    /// Offset from midnight, folding multi-day stamps onto one day.
    pub const fn time_of_day(self) -> u64 {
        self.0 % NANOS_PER_DAY
    }

    pub fn saturating_since(self, earlier: Timestamp) -> u64 {
        self.0.saturating_sub(earlier.0)
    }

    pub fn plus(self, nanos: u64) -> Timestamp {
        Timestamp(self.0 + nanos)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tod = self.time_of_day();
        let secs = tod / 1_000_000_000;
        write!(
            f,
            "{:02}:{:02}:{:02}.{:09}",
            secs / 3600,
            (secs / 60) % 60,
            secs % 60,
            tod % 1_000_000_000
        )
    }
}

/// Ticker symbol. Printable ASCII, no commas or whitespace, at most 16 bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(ArrayString<16>);

impl Symbol {
    pub fn new(s: &str) -> Result<Self, ModelError> {
        let ok = !s.is_empty() && s.bytes().all(|b| b.is_ascii_graphic() && b != b',');
        if !ok {
            return Err(ModelError::BadSymbol(s.to_string()));
        }
        ArrayString::from(s)
            .map(Symbol)
            .map_err(|_| ModelError::BadSymbol(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Symbol {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Symbol::new(s)
    }
}

/// Exchange identifier, `[A-Z]{1,8}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExchangeId(ArrayString<8>);

impl ExchangeId {
    pub fn new(s: &str) -> Result<Self, ModelError> {
        if s.is_empty() || s.len() > 8 || !s.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(ModelError::BadExchange(s.to_string()));
        }
        Ok(ExchangeId(ArrayString::from(s).expect("length checked")))
    }

    pub fn as_str(&self) -> &str {
        self.0.as_str()
    }
}

impl fmt::Display for ExchangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExchangeId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExchangeId::new(s)
    }
}

/// Origin of a feed event. The derived ordering puts `Sip` before every
/// `Direct`, and directs by exchange id, which is the merge tie-break.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Sip,
    Direct(ExchangeId),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Sip => f.write_str("SIP"),
            Source::Direct(x) => write!(f, "D:{x}"),
        }
    }
}

/// Top-of-book quote. A side with price 0 and size 0 is absent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Quote {
    pub bid: Price,
    pub bid_size: Shares,
    pub offer: Price,
    pub offer_size: Shares,
}

impl Quote {
    pub const EMPTY: Quote = Quote { bid: Price::ZERO, bid_size: 0, offer: Price::ZERO, offer_size: 0 };

    pub fn new(bid: Price, bid_size: Shares, offer: Price, offer_size: Shares) -> Self {
        Quote { bid, bid_size, offer, offer_size }
    }

    pub fn same_prices(&self, other: &Quote) -> bool {
        self.bid == other.bid && self.offer == other.offer
    }
}

/// A consolidated-tape trade print.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TradeMsg {
    pub price: Price,
    pub volume: Shares,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Quote(Quote),
    Trade(TradeMsg),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FeedEvent {
    pub ts: Timestamp,
    pub symbol: Symbol,
    pub source: Source,
    pub payload: Payload,
}

impl FeedEvent {
    pub fn quote(ts: Timestamp, symbol: Symbol, source: Source, quote: Quote) -> Self {
        FeedEvent { ts, symbol, source, payload: Payload::Quote(quote) }
    }

    pub fn trade(ts: Timestamp, symbol: Symbol, price: Price, volume: Shares) -> Self {
        FeedEvent { ts, symbol, source: Source::Sip, payload: Payload::Trade(TradeMsg { price, volume }) }
    }

    pub fn is_trade(&self) -> bool {
        matches!(self.payload, Payload::Trade(_))
    }
}

/// Index-membership category of a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Dow,
    SpexDow,
    RexSp,
    Etf,
    Other,
}

impl Category {
    pub const ALL: [Category; 5] = [Category::Dow, Category::SpexDow, Category::RexSp, Category::Etf, Category::Other];

    pub fn tag(self) -> &'static str {
        match self {
            Category::Dow => "DOW",
            Category::SpexDow => "SPEXDOW",
            Category::RexSp => "REXSP",
            Category::Etf => "ETF",
            Category::Other => "OTHER",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Category {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.tag() == s)
            .ok_or_else(|| ModelError::BadCategory(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMeta {
    pub ticker: Symbol,
    /// USD; `None` when the metadata row leaves it blank.
    pub market_cap: Option<u64>,
    pub sector: String,
    pub category: Category,
}

/// First violated invariant of a feed event, or `None` when well formed.
///
/// Locked and crossed quotes are legal.
pub fn validate_event(e: &FeedEvent) -> Option<&'static str> {
    match e.payload {
        Payload::Quote(q) => {
            if q.bid.0 < 0 || q.offer.0 < 0 {
                return Some("quote price must not be negative");
            }
            if q.bid.0 == 0 && q.bid_size != 0 {
                return Some("absent bid must have zero size");
            }
            if q.offer.0 == 0 && q.offer_size != 0 {
                return Some("absent offer must have zero size");
            }
            None
        }
        Payload::Trade(t) => {
            if e.source != Source::Sip {
                return Some("trades must be reported on the SIP");
            }
            if t.volume == 0 {
                return Some("volume must be positive");
            }
            if t.price.0 <= 0 {
                return Some("trade price must be positive");
            }
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym() -> Symbol {
        Symbol::new("AAPL").unwrap()
    }

    #[test]
    fn well_formed_quote_is_ok() {
        let q = Quote::new(Price(100_000), 1, Price(100_100), 1);
        let e = FeedEvent::quote(Timestamp(0), sym(), Source::Sip, q);
        assert_eq!(validate_event(&e), None);
    }

    #[test]
    fn zero_volume_trade_is_rejected() {
        let e = FeedEvent::trade(Timestamp(0), sym(), Price(100_000), 0);
        assert_eq!(validate_event(&e), Some("volume must be positive"));
    }

    #[test]
    fn crossed_quote_is_ok() {
        let q = Quote::new(Price(100_100), 1, Price(100_000), 1);
        let e = FeedEvent::quote(Timestamp(0), sym(), Source::Direct(ExchangeId::new("NYSE").unwrap()), q);
        assert_eq!(validate_event(&e), None);
    }

    #[test]
    fn direct_trade_is_rejected() {
        let mut e = FeedEvent::trade(Timestamp(0), sym(), Price(100_000), 10);
        e.source = Source::Direct(ExchangeId::new("NYSE").unwrap());
        assert!(validate_event(&e).is_some());
    }

    #[test]
    fn absent_side_with_size_is_rejected() {
        let q = Quote::new(Price(0), 5, Price(100_100), 1);
        let e = FeedEvent::quote(Timestamp(0), sym(), Source::Sip, q);
        assert_eq!(validate_event(&e), Some("absent bid must have zero size"));
    }

    #[test]
    fn price_formatting() {
        assert_eq!(Price(100_100).to_string(), "10.0100");
        assert_eq!(Price(-5).to_string(), "-0.0005");
        assert_eq!("10.01".parse::<Price>().unwrap(), Price(100_100));
        assert_eq!("7".parse::<Price>().unwrap(), Price(70_000));
        assert!("1.00001".parse::<Price>().is_err());
        assert!("1.a".parse::<Price>().is_err());
        assert!(".5".parse::<Price>().is_err());
    }

    #[test]
    fn source_ordering_puts_sip_first() {
        let a = Source::Direct(ExchangeId::new("ARCA").unwrap());
        let n = Source::Direct(ExchangeId::new("NYSE").unwrap());
        assert!(Source::Sip < a && a < n);
    }

    #[test]
    fn symbol_rules() {
        assert!(Symbol::new("BRK.B").is_ok());
        assert!(Symbol::new("A,B").is_err());
        assert!(Symbol::new("").is_err());
        assert!(ExchangeId::new("nyse").is_err());
        assert!(ExchangeId::new("ABCDEFGHI").is_err());
    }

    #[test]
    fn full_session_fits_in_u64() {
        let end = Timestamp::from_secs(86_400);
        assert!(end.nanos() < u64::MAX / 1000);
        assert_eq!(Timestamp::from_secs(34_200).to_string(), "09:30:00.000000000");
    }

    proptest! {
        #[test]
        fn price_decimal_round_trip(units in any::<i64>().prop_filter("abs fits", |u| *u != i64::MIN)) {
            let p = Price(units);
            prop_assert_eq!(p.to_string().parse::<Price>().unwrap(), p);
        }
    }
}
