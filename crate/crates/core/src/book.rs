//! Per-symbol quote state: the latest top of book per exchange, the synthetic
//! direct BBO built from them, and the SIP NBBO as disseminated.

use crate::model::{ExchangeId, Price, Quote, Shares, Timestamp};

/// Best bid and offer with aggregated size at the best prices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConsolidatedBBO {
    pub bid: Price,
    pub bid_size: Shares,
    pub offer: Price,
    pub offer_size: Shares,
    /// Time of the last change (prices or sizes).
    pub ts: Timestamp,
}

impl ConsolidatedBBO {
    pub fn quote(&self) -> Quote {
        Quote::new(self.bid, self.bid_size, self.offer, self.offer_size)
    }

    pub fn same_prices(&self, other: &ConsolidatedBBO) -> bool {
        self.bid == other.bid && self.offer == other.offer
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BookSide {
    Bid,
    Offer,
}

impl BookSide {
    fn of(self, q: &Quote) -> (Price, Shares) {
        match self {
            BookSide::Bid => (q.bid, q.bid_size),
            BookSide::Offer => (q.offer, q.offer_size),
        }
    }

    /// Whether `a` is a strictly better price than `b`; absent prices are worst.
    fn better(self, a: Price, b: Price) -> bool {
        if !a.is_present() {
            return false;
        }
        if !b.is_present() {
            return true;
        }
        match self {
            BookSide::Bid => a > b,
            BookSide::Offer => a < b,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct BestLevel {
    price: Price,
    size: Shares,
    /// Exchanges quoting exactly `price`.
    venues: u32,
}

fn rescan_side<'a>(side: BookSide, quotes: impl Iterator<Item = &'a Quote>) -> BestLevel {
    let mut best = BestLevel::default();
    for q in quotes {
        let (p, s) = side.of(q);
        if side.better(p, best.price) {
            best = BestLevel { price: p, size: s, venues: 1 };
        } else if p.is_present() && p == best.price {
            best.size += s;
            best.venues += 1;
        }
    }
    best
}

/// Aggregates quotes by full rescan: max bid, min offer, sizes summed at the best.
pub fn aggregate<'a>(quotes: impl Iterator<Item = &'a Quote> + Clone) -> Quote {
    let bid = rescan_side(BookSide::Bid, quotes.clone());
    let offer = rescan_side(BookSide::Offer, quotes);
    Quote::new(bid.price, bid.size, offer.price, offer.size)
}

/// Latest top of book per exchange. Exchanges that never quoted contribute nothing.
#[derive(Clone, Debug, Default)]
pub struct ExchangeBook {
    tops: Vec<(ExchangeId, Quote)>,
}

impl ExchangeBook {
    pub fn get(&self, exch: ExchangeId) -> Option<&Quote> {
        self.tops.iter().find(|(x, _)| *x == exch).map(|(_, q)| q)
    }

    /// Stores `q` as the exchange's top and returns the quote it replaced.
    fn replace(&mut self, exch: ExchangeId, q: Quote) -> Quote {
        match self.tops.iter_mut().find(|(x, _)| *x == exch) {
            Some((_, slot)) => std::mem::replace(slot, q),
            None => {
                self.tops.push((exch, q));
                Quote::EMPTY
            }
        }
    }

    pub fn quotes(&self) -> impl Iterator<Item = &Quote> + Clone {
        self.tops.iter().map(|(_, q)| q)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ExchangeId, &Quote)> {
        self.tops.iter().map(|(x, q)| (*x, q))
    }

    pub fn len(&self) -> usize {
        self.tops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tops.is_empty()
    }
}

/// Result of applying one quote.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BboUpdate {
    pub bbo: ConsolidatedBBO,
    pub prices_changed: bool,
}

/// Quote state for one symbol.
#[derive(Clone, Debug, Default)]
pub struct SymbolBook {
    direct: ExchangeBook,
    bid: BestLevel,
    offer: BestLevel,
    dbbo: ConsolidatedBBO,
    sip: ConsolidatedBBO,
}

impl SymbolBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dbbo(&self) -> &ConsolidatedBBO {
        &self.dbbo
    }

    pub fn sip(&self) -> &ConsolidatedBBO {
        &self.sip
    }

    pub fn exchanges(&self) -> &ExchangeBook {
        &self.direct
    }

    /// Replaces one exchange's top of book and maintains the DBBO incrementally.
    pub fn apply_direct_quote(&mut self, exch: ExchangeId, q: Quote, ts: Timestamp) -> BboUpdate {
        let old = self.direct.replace(exch, q);
        let before = self.dbbo;
        self.bid = Self::update_level(BookSide::Bid, self.bid, &old, &q, &self.direct);
        self.offer = Self::update_level(BookSide::Offer, self.offer, &old, &q, &self.direct);
        let mut next = ConsolidatedBBO {
            bid: self.bid.price,
            bid_size: self.bid.size,
            offer: self.offer.price,
            offer_size: self.offer.size,
            ts: before.ts,
        };
        if next.quote() != before.quote() {
            next.ts = ts;
        }
        self.dbbo = next;
        BboUpdate { bbo: next, prices_changed: !next.same_prices(&before) }
    }

    fn update_level(side: BookSide, mut best: BestLevel, old: &Quote, new: &Quote, book: &ExchangeBook) -> BestLevel {
        let (old_p, old_s) = side.of(old);
        let (new_p, new_s) = side.of(new);
        if old_p.is_present() && old_p == best.price {
            best.size -= old_s;
            best.venues -= 1;
            if best.venues == 0 {
                // The best level emptied; some other venue may now be best.
                return rescan_side(side, book.quotes());
            }
        }
        if side.better(new_p, best.price) {
            best = BestLevel { price: new_p, size: new_s, venues: 1 };
        } else if new_p.is_present() && new_p == best.price {
            best.size += new_s;
            best.venues += 1;
        }
        best
    }

    /// Replaces the SIP NBBO verbatim; the SIP already carries consolidated prices.
    pub fn apply_sip_quote(&mut self, q: Quote, ts: Timestamp) -> BboUpdate {
        let before = self.sip;
        let mut next = ConsolidatedBBO { bid: q.bid, bid_size: q.bid_size, offer: q.offer, offer_size: q.offer_size, ts: before.ts };
        if next.quote() != before.quote() {
            next.ts = ts;
        }
        self.sip = next;
        BboUpdate { bbo: next, prices_changed: !next.same_prices(&before) }
    }
}
