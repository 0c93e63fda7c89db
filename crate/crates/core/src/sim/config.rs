//! Simulator configuration, read from TOML.
//!
//! ```toml
//! [topology]
//! observer = "Carteret"
//! jitter_ns = 0                 # optional uniform jitter per link traversal
//! sip = { location = "Mahwah", processing_ns = 92000 }
//! exchange = [ { id = "NYSE", location = "Mahwah" }, { id = "NASD", location = "Carteret" } ]
//! link = [ { from = "Mahwah", to = "Carteret", ns = 282000 },
//!          { from = "Mahwah", to = "Mahwah", ns = 5000 } ]
//!
//! [process]
//! seed = 7
//! date = "2016-01-04"
//! quote_rate_hz = 20.0
//! trade_rate_hz = 2.0
//! symbol = [ { ticker = "AAPL", initial_mid = 1000000 } ]
//! ```
//!
//! Links are one-way latencies between locations. A missing link falls back to
//! the reverse direction; a missing same-location link is 0 ns.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::{Category, ExchangeId, Symbol, CENT};

pub const TICK: i64 = CENT;
pub const DEFAULT_OPEN_NS: u64 = 34_200_000_000_000;
pub const DEFAULT_SESSION_NS: u64 = 23_400_000_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub topology: TopologyConfig,
    pub process: QuoteProcessConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub observer: String,
    pub sip: SipSite,
    #[serde(rename = "exchange")]
    pub exchanges: Vec<ExchangeSite>,
    #[serde(rename = "link", default)]
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub jitter_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SipSite {
    pub location: String,
    pub processing_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeSite {
    pub id: String,
    pub location: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub from: String,
    pub to: String,
    pub ns: u64,
}

fn one() -> u32 {
    1
}
fn default_open() -> u64 {
    DEFAULT_OPEN_NS
}
fn default_length() -> u64 {
    DEFAULT_SESSION_NS
}
fn default_step() -> f64 {
    0.3
}
fn default_spreads() -> Vec<f64> {
    vec![0.6, 0.3, 0.1]
}
fn default_lot() -> u64 {
    100
}
fn default_quote_lots() -> u64 {
    10
}
fn default_trade_lots() -> [u64; 2] {
    [1, 5]
}
fn default_decay() -> f64 {
    600.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuoteProcessConfig {
    pub seed: u64,
    pub date: NaiveDate,
    #[serde(default = "one")]
    pub days: u32,
    #[serde(default = "default_open")]
    pub session_open_ns: u64,
    #[serde(default = "default_length")]
    pub session_length_ns: u64,
    /// Exchange quote updates per second, per symbol.
    pub quote_rate_hz: f64,
    /// Trades per second, per symbol.
    pub trade_rate_hz: f64,
    /// Probability that a quote update first moves the symbol's mid by ±1 tick.
    #[serde(default = "default_step")]
    pub step_prob: f64,
    /// Relative weights of spreads of 1, 2, 3, ... ticks.
    #[serde(default = "default_spreads")]
    pub spread_weights: Vec<f64>,
    #[serde(default = "default_lot")]
    pub lot_size: u64,
    /// Quoted sizes are uniform in 1..=quote_lots_max lots.
    #[serde(default = "default_quote_lots")]
    pub quote_lots_max: u64,
    /// Inclusive range of trade sizes in lots.
    #[serde(default = "default_trade_lots")]
    pub trade_lots: [u64; 2],
    /// Fraction of trades printed at the midpoint instead of a quote.
    #[serde(default)]
    pub midpoint_prob: f64,
    /// Intraday rate multiplier `1 + boost·(e^{−u/τ} + e^{−(T−u)/τ})`.
    #[serde(default)]
    pub open_close_boost: f64,
    #[serde(default = "default_decay")]
    pub boost_decay_s: f64,
    #[serde(rename = "symbol")]
    pub symbols: Vec<SymbolProcess>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolProcess {
    pub ticker: String,
    /// Starting mid in 10⁻⁴ USD; rounded down to a whole tick.
    pub initial_mid: i64,
    #[serde(default)]
    pub quote_rate_hz: Option<f64>,
    #[serde(default)]
    pub trade_rate_hz: Option<f64>,
    /// A mid move is uniform in 1..=max_step_ticks ticks (default 1).
    #[serde(default)]
    pub max_step_ticks: Option<u32>,
    /// Overrides the process-wide spread weights for this symbol.
    #[serde(default)]
    pub spread_weights: Option<Vec<f64>>,
    /// Metadata passed through to the symbol table; not used by the process.
    #[serde(default)]
    pub category: Option<Category>,
    #[serde(default)]
    pub market_cap: Option<u64>,
    #[serde(default)]
    pub sector: Option<String>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        Topology::resolve(&self.topology)?;
        let p = &self.process;
        let bad = |m: String| Err(SimError::Config(m));
        if p.symbols.is_empty() {
            return bad("at least one symbol is required".into());
        }
        if p.days == 0 {
            return bad("days must be positive".into());
        }
        if p.session_length_ns == 0 || p.session_open_ns + p.session_length_ns > crate::model::NANOS_PER_DAY {
            return bad("session must be non-empty and end within the day".into());
        }
        if !(0.0..=1.0).contains(&p.step_prob) || !(0.0..=1.0).contains(&p.midpoint_prob) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        let weights_ok = |w: &[f64]| !w.is_empty() && w.iter().all(|x| *x >= 0.0) && w.iter().sum::<f64>() > 0.0;
        if !weights_ok(&p.spread_weights) || p.symbols.iter().any(|s| s.spread_weights.as_deref().is_some_and(|w| !weights_ok(w))) {
            return bad("spread_weights must be non-negative with positive sum".into());
        }
        if p.lot_size == 0 || p.quote_lots_max == 0 || p.trade_lots[0] == 0 || p.trade_lots[0] > p.trade_lots[1] {
            return bad("lot sizes must be positive and trade_lots ordered".into());
        }
        if !(p.open_close_boost >= 0.0) || !(p.boost_decay_s > 0.0) {
            return bad("open_close_boost must be >= 0 and boost_decay_s > 0".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &p.symbols {
            Symbol::new(&s.ticker).map_err(|e| SimError::Config(e.to_string()))?;
            if !seen.insert(s.ticker.as_str()) {
                return bad(format!("duplicate symbol {}", s.ticker));
            }
            let q = s.quote_rate_hz.unwrap_or(p.quote_rate_hz);
            let t = s.trade_rate_hz.unwrap_or(p.trade_rate_hz);
            if !(q > 0.0) || !(t >= 0.0) {
                return bad(format!("{}: quote rate must be > 0 and trade rate >= 0", s.ticker));
            }
            if s.max_step_ticks == Some(0) {
                return bad(format!("{}: max_step_ticks must be positive", s.ticker));
            }
            if s.initial_mid < 100 * TICK {
                return bad(format!("{}: initial_mid must be at least $1.00", s.ticker));
            }
        }
        Ok(())
    }
}

/// Topology with every latency resolved per exchange.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub exchanges: Vec<ExchangeId>,
    pub to_observer: Vec<u64>,
    pub to_sip: Vec<u64>,
    pub sip_to_observer: u64,
    pub sip_to_exchange: Vec<u64>,
    pub processing_ns: u64,
    pub jitter_ns: u64,
}

impl Topology {
    pub fn resolve(cfg: &TopologyConfig) -> Result<Self, SimError> {
        let link = |from: &str, to: &str| -> Result<u64, SimError> {
            let find = |a: &str, b: &str| cfg.links.iter().find(|l| l.from == a && l.to == b).map(|l| l.ns);
            find(from, to)
                .or_else(|| find(to, from))
                .or_else(|| (from == to).then_some(0))
                .ok_or_else(|| SimError::Config(format!("no link between {from} and {to}")))
        };
        if cfg.exchanges.is_empty() {
            return Err(SimError::Config("at least one exchange is required".into()));
        }
        let mut exchanges = Vec::new();
        let (mut to_observer, mut to_sip, mut sip_to_exchange) = (Vec::new(), Vec::new(), Vec::new());
        for site in &cfg.exchanges {
            let id = ExchangeId::new(&site.id).map_err(|e| SimError::Config(e.to_string()))?;
            if exchanges.contains(&id) {
                return Err(SimError::Config(format!("duplicate exchange {id}")));
            }
            exchanges.push(id);
            to_observer.push(link(&site.location, &cfg.observer)?);
            to_sip.push(link(&site.location, &cfg.sip.location)?);
            sip_to_exchange.push(link(&cfg.sip.location, &site.location)?);
        }
        Ok(Topology {
            exchanges,
            to_observer,
            to_sip,
            sip_to_observer: link(&cfg.sip.location, &cfg.observer)?,
            sip_to_exchange,
            processing_ns: cfg.sip.processing_ns,
            jitter_ns: cfg.jitter_ns,
        })
    }
}
