//! Stochastic quote and trade driver for one symbol-day.
//!
//! Quote updates and trades arrive as independent Poisson processes (optionally
//! modulated by an open/close intraday profile via thinning). A quote update
//! picks an exchange uniformly, moves the shared mid by ±1 tick (or a
//! uniform 1..=max_step_ticks ticks) with `step_prob`, and re-quotes that exchange around the mid with a random spread.
//! Trades print at the instantaneous NBBO across all exchange books.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use super::config::{QuoteProcessConfig, SymbolProcess, TICK};
use super::network::{LocalEvent, LocalKind};
use crate::book::aggregate;
use crate::model::{Price, Quote, TradeMsg};

/// Floor for the simulated mid, ten ticks.
const MIN_MID: i64 = 10 * TICK;

pub struct SymbolDay {
    pub initial: Vec<Quote>,
    pub locals: Vec<LocalEvent>,
}

struct Arrivals {
    exp: Exp<f64>,
    next: f64,
}

impl Arrivals {
    fn new(rate_per_ns: f64, start: f64, rng: &mut ChaCha8Rng) -> Option<Self> {
        if rate_per_ns <= 0.0 {
            return None;
        }
        let exp = Exp::new(rate_per_ns).expect("positive rate");
        let next = start + exp.sample(rng);
        Some(Arrivals { exp, next })
    }

    fn advance(&mut self, rng: &mut ChaCha8Rng) {
        self.next += self.exp.sample(rng);
    }
}

fn profile(p: &QuoteProcessConfig, offset_ns: f64) -> f64 {
    let tau = p.boost_decay_s * 1e9;
    let len = p.session_length_ns as f64;
    1.0 + p.open_close_boost * ((-offset_ns / tau).exp() + (-(len - offset_ns) / tau).exp())
}

fn quote_around(mid: i64, p: &QuoteProcessConfig, spreads: &WeightedIndex<f64>, rng: &mut ChaCha8Rng) -> Quote {
    let ticks = spreads.sample(rng) as i64 + 1;
    let bid = mid - (ticks / 2) * TICK;
    let offer = bid + ticks * TICK;
    let bid_size = rng.random_range(1..=p.quote_lots_max) * p.lot_size;
    let offer_size = rng.random_range(1..=p.quote_lots_max) * p.lot_size;
    Quote::new(Price(bid), bid_size, Price(offer), offer_size)
}

pub fn generate(p: &QuoteProcessConfig, s: &SymbolProcess, exchanges: usize, rng: &mut ChaCha8Rng) -> SymbolDay {
    let spreads = WeightedIndex::new(s.spread_weights.as_ref().unwrap_or(&p.spread_weights)).expect("validated weights");
    let max_step = s.max_step_ticks.unwrap_or(1);
    let mut mid = (s.initial_mid / TICK) * TICK;
    let start_size = p.quote_lots_max.div_ceil(2) * p.lot_size;
    let initial = vec![Quote::new(Price(mid), start_size, Price(mid + TICK), start_size); exchanges];
    let mut books = initial.clone();

    let open = p.session_open_ns as f64;
    let end = open + p.session_length_ns as f64;
    // Peak of the intraday profile bounds the thinning envelope.
    let peak = 1.0 + 2.0 * p.open_close_boost;
    let q_rate = s.quote_rate_hz.unwrap_or(p.quote_rate_hz) * 1e-9 * peak;
    let t_rate = s.trade_rate_hz.unwrap_or(p.trade_rate_hz) * 1e-9 * peak;
    let mut quotes = Arrivals::new(q_rate, open, rng);
    let mut trades = Arrivals::new(t_rate, open, rng);
    let mut locals = Vec::new();

    loop {
        let q_next = quotes.as_ref().map_or(f64::INFINITY, |a| a.next);
        let t_next = trades.as_ref().map_or(f64::INFINITY, |a| a.next);
        let is_quote = q_next <= t_next;
        let at = q_next.min(t_next);
        if at >= end {
            break;
        }
        if is_quote {
            quotes.as_mut().expect("quote stream").advance(rng);
        } else {
            trades.as_mut().expect("trade stream").advance(rng);
        }
        if p.open_close_boost > 0.0 && rng.random::<f64>() * peak >= profile(p, at - open) {
            continue;
        }
        let ts = at as u64;
        let exchange = rng.random_range(0..exchanges);
        if is_quote {
            if rng.random_bool(p.step_prob) {
                let ticks = match max_step {
                    1 => 1,
                    k => rng.random_range(1..=k) as i64,
                };
                mid += if rng.random_bool(0.5) { ticks * TICK } else { -ticks * TICK };
                mid = mid.max(MIN_MID);
            }
            let q = quote_around(mid, p, &spreads, rng);
            if q != books[exchange] {
                books[exchange] = q;
                locals.push(LocalEvent { ts, exchange, kind: LocalKind::Quote(q) });
            }
        } else {
            let nbbo = aggregate(books.iter());
            let volume = rng.random_range(p.trade_lots[0]..=p.trade_lots[1]) * p.lot_size;
            let price = if rng.random_bool(p.midpoint_prob) {
                if !nbbo.bid.is_present() || !nbbo.offer.is_present() {
                    continue;
                }
                Price((nbbo.bid.0 + nbbo.offer.0) / 2)
            } else if rng.random_bool(0.5) {
                nbbo.offer
            } else {
                nbbo.bid
            };
            if price.is_present() {
                locals.push(LocalEvent { ts, exchange, kind: LocalKind::Trade(TradeMsg { price, volume }) });
            }
        }
    }
    SymbolDay { initial, locals }
}
