//! Realized opportunity cost of trades printed while the feeds disagree.
//!
//! Feed 1 is the SIP, feed 2 the synthetic direct BBO. A trade at the SIP bid
//! costs `(dbbo.bid − sip.bid)·v`; at the SIP offer `(sip.offer − dbbo.offer)·v`.
//! Positive means the direct feed showed the better price for the active
//! trader. Money is carried as exact integers in 10⁻⁴ USD·shares.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::book::ConsolidatedBBO;
use crate::model::{Price, Shares, Symbol, Timestamp, TradeMsg, PRICE_SCALE};

/// Integer money amount in 10⁻⁴ USD (price units × shares).
pub type Money = i128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SipSide {
    Bid,
    Offer,
}

impl SipSide {
    pub fn tag(self) -> &'static str {
        match self {
            SipSide::Bid => "SIP_BID",
            SipSide::Offer => "SIP_OFFER",
        }
    }
}

/// Why a trade did not enter the ROC total.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exclusion {
    NotDiffering,
    NotAtSipQuote,
    /// Trade price equals both SIP quotes.
    LockedSip,
    /// The direct BBO has no price on the matched side.
    DirectSideAbsent,
}

impl Exclusion {
    pub fn tag(self) -> &'static str {
        match self {
            Exclusion::NotDiffering => "not_differing",
            Exclusion::NotAtSipQuote => "not_at_sip_quote",
            Exclusion::LockedSip => "locked_sip",
            Exclusion::DirectSideAbsent => "direct_side_absent",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RocRecord {
    pub symbol: Symbol,
    pub ts: Timestamp,
    /// Position of the trade in the input stream.
    pub seq: u64,
    pub price: Price,
    pub volume: Shares,
    pub side_matched: Option<SipSide>,
    pub roc_signed: Money,
    pub is_differing: bool,
    pub included: bool,
    pub exclusion: Option<Exclusion>,
}

impl RocRecord {
    pub fn traded_value(&self) -> Money {
        Money::from(self.price.0) * Money::from(self.volume)
    }
}

/// Signed ROC of a trade at `side` of feed 1 when feed 2 shows `f2`.
pub fn roc_at(side: SipSide, f1: Price, f2: Price, volume: Shares) -> Money {
    let diff = match side {
        SipSide::Bid => f2.0 - f1.0,
        SipSide::Offer => f1.0 - f2.0,
    };
    Money::from(diff) * Money::from(volume)
}

/// Classifies one trade against the quote state prevailing at its timestamp.
/// `is_differing` is whether any segment is open for the symbol.
pub fn classify_trade(
    symbol: Symbol,
    ts: Timestamp,
    seq: u64,
    trade: &TradeMsg,
    sip: &ConsolidatedBBO,
    dbbo: &ConsolidatedBBO,
    is_differing: bool,
) -> RocRecord {
    let mut rec = RocRecord {
        symbol,
        ts,
        seq,
        price: trade.price,
        volume: trade.volume,
        side_matched: None,
        roc_signed: 0,
        is_differing,
        included: false,
        exclusion: None,
    };
    let at_bid = sip.bid.is_present() && trade.price == sip.bid;
    let at_offer = sip.offer.is_present() && trade.price == sip.offer;
    rec.side_matched = match (at_bid, at_offer) {
        (true, false) => Some(SipSide::Bid),
        (false, true) => Some(SipSide::Offer),
        _ => None,
    };
    if !is_differing {
        rec.exclusion = Some(Exclusion::NotDiffering);
        return rec;
    }
    let side = match rec.side_matched {
        Some(side) => side,
        None => {
            rec.exclusion = Some(if at_bid && at_offer { Exclusion::LockedSip } else { Exclusion::NotAtSipQuote });
            return rec;
        }
    };
    let (f1, f2) = match side {
        SipSide::Bid => (sip.bid, dbbo.bid),
        SipSide::Offer => (sip.offer, dbbo.offer),
    };
    if !f2.is_present() {
        rec.exclusion = Some(Exclusion::DirectSideAbsent);
        return rec;
    }
    rec.included = true;
    rec.roc_signed = roc_at(side, f1, f2, trade.volume);
    rec
}

/// Per-key (symbol or category) per-day aggregates. Rows form a commutative
/// monoid under [`PurseRow::merge`].
#[derive(Clone, Debug, PartialEq)]
pub struct PurseRow {
    pub key: String,
    pub date: NaiveDate,
    pub trades: u64,
    pub traded_value: Money,
    pub diff_trades: u64,
    pub diff_traded_value: Money,
    pub included_trades: u64,
    /// Denominator of ROC per share.
    pub included_shares: u64,
    pub roc_total: Money,
    pub roc_sip: Money,
    pub roc_direct: Money,
    /// Number of symbol-day rows merged into this one.
    pub members: u64,
    /// Sum of member rows' ROC per share (USD/share), for the per-symbol mean.
    pub roc_per_share_sum: f64,
}

impl PurseRow {
    pub fn empty(key: impl Into<String>, date: NaiveDate) -> Self {
        PurseRow {
            key: key.into(),
            date,
            trades: 0,
            traded_value: 0,
            diff_trades: 0,
            diff_traded_value: 0,
            included_trades: 0,
            included_shares: 0,
            roc_total: 0,
            roc_sip: 0,
            roc_direct: 0,
            members: 0,
            roc_per_share_sum: 0.0,
        }
    }

    pub fn add(&mut self, r: &RocRecord) {
        self.trades += 1;
        self.traded_value += r.traded_value();
        if r.is_differing {
            self.diff_trades += 1;
            self.diff_traded_value += r.traded_value();
        }
        if r.included {
            self.included_trades += 1;
            self.included_shares += r.volume;
            self.roc_total += r.roc_signed.abs();
            self.roc_sip += r.roc_signed.max(0);
            self.roc_direct += (-r.roc_signed).max(0);
        }
    }

    /// Share-weighted ROC per share in USD; 0 without included records.
    pub fn roc_per_share(&self) -> f64 {
        if self.included_shares == 0 {
            0.0
        } else {
            money_to_usd(self.roc_total) / self.included_shares as f64
        }
    }

    /// Unweighted mean of member symbols' ROC per share.
    pub fn roc_per_share_mean(&self) -> f64 {
        if self.members == 0 {
            0.0
        } else {
            self.roc_per_share_sum / self.members as f64
        }
    }

    pub fn roc_per_traded_value(&self) -> f64 {
        if self.traded_value == 0 {
            0.0
        } else {
            self.roc_total as f64 / self.traded_value as f64
        }
    }

    /// Marks this row as one symbol-day member (call after all `add`s).
    pub fn seal_as_symbol(&mut self) {
        self.members = 1;
        self.roc_per_share_sum = self.roc_per_share();
    }

    pub fn merge(&mut self, o: &PurseRow) {
        self.trades += o.trades;
        self.traded_value += o.traded_value;
        self.diff_trades += o.diff_trades;
        self.diff_traded_value += o.diff_traded_value;
        self.included_trades += o.included_trades;
        self.included_shares += o.included_shares;
        self.roc_total += o.roc_total;
        self.roc_sip += o.roc_sip;
        self.roc_direct += o.roc_direct;
        self.members += o.members;
        self.roc_per_share_sum += o.roc_per_share_sum;
    }
}

/// Per-symbol rows for one session date, keyed by ticker.
pub fn aggregate_purse(records: &[RocRecord], date: NaiveDate) -> BTreeMap<Symbol, PurseRow> {
    let mut rows: BTreeMap<Symbol, PurseRow> = BTreeMap::new();
    for r in records {
        rows.entry(r.symbol).or_insert_with(|| PurseRow::empty(r.symbol.as_str(), date)).add(r);
    }
    for row in rows.values_mut() {
        row.seal_as_symbol();
    }
    rows
}

/// Re-keys symbol rows (e.g. by category) and merges rows sharing (key, date).
pub fn rollup<'a, F>(rows: impl IntoIterator<Item = &'a PurseRow>, mut key: F) -> BTreeMap<(String, NaiveDate), PurseRow>
where
    F: FnMut(&PurseRow) -> Option<String>,
{
    let mut out: BTreeMap<(String, NaiveDate), PurseRow> = BTreeMap::new();
    for row in rows {
        let Some(k) = key(row) else { continue };
        out.entry((k.clone(), row.date)).or_insert_with(|| PurseRow::empty(k, row.date)).merge(row);
    }
    out
}

pub fn money_to_usd(m: Money) -> f64 {
    m as f64 / PRICE_SCALE as f64
}

/// Exact decimal rendering with four fractional digits, e.g. `1914018654.4100`.
pub fn format_money_exact(m: Money) -> String {
    let sign = if m < 0 { "-" } else { "" };
    let a = m.unsigned_abs();
    let s = PRICE_SCALE as u128;
    format!("{sign}{}.{:04}", a / s, a % s)
}

fn group_thousands(n: u128) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// `$1,914,018,654.41` — rounded half away from zero to cents.
pub fn format_usd(m: Money) -> String {
    let sign = if m < 0 { "-" } else { "" };
    let cents = (m.unsigned_abs() + 50) / 100;
    format!("{sign}${}.{:02}", group_thousands(cents / 100), cents % 100)
}

pub fn format_count(n: u64) -> String {
    group_thousands(u128::from(n))
}

/// The ten summary lines for an arbitrary set of purse rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PurseReport {
    pub roc: Money,
    pub sip_oc: Money,
    pub direct_oc: Money,
    pub trades: u64,
    pub diff_trades: u64,
    pub traded_value: Money,
    pub diff_traded_value: Money,
}

impl PurseReport {
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a PurseRow>) -> Self {
        let mut r = PurseReport { roc: 0, sip_oc: 0, direct_oc: 0, trades: 0, diff_trades: 0, traded_value: 0, diff_traded_value: 0 };
        for row in rows {
            r.roc += row.roc_total;
            r.sip_oc += row.roc_sip;
            r.direct_oc += row.roc_direct;
            r.trades += row.trades;
            r.diff_trades += row.diff_trades;
            r.traded_value += row.traded_value;
            r.diff_traded_value += row.diff_traded_value;
        }
        r
    }

    /// Line 8, percent of trades that were differing.
    pub fn pct_diff_trades(&self) -> Option<f64> {
        (self.trades > 0).then(|| 100.0 * self.diff_trades as f64 / self.trades as f64)
    }

    /// Line 9, percent of traded value that was differing.
    pub fn pct_diff_traded_value(&self) -> Option<f64> {
        (self.traded_value != 0).then(|| 100.0 * self.diff_traded_value as f64 / self.traded_value as f64)
    }

    /// Line 10, line 9 / line 8, computed from the exact integers.
    pub fn ratio(&self) -> Option<f64> {
        if self.trades == 0 || self.diff_trades == 0 || self.traded_value == 0 {
            return None;
        }
        let num = self.diff_traded_value as f64 * self.trades as f64;
        let den = self.traded_value as f64 * self.diff_trades as f64;
        Some(num / den)
    }

    pub fn identities_hold(&self) -> bool {
        self.roc == self.sip_oc + self.direct_oc
    }

    /// `(line, label, rendered value)` for all ten lines.
    pub fn lines(&self) -> Vec<(u8, &'static str, String)> {
        let opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.prec$}"));
        vec![
            (1, "Realized Opportunity Cost", format_usd(self.roc)),
            (2, "SIP Opportunity Cost", format_usd(self.sip_oc)),
            (3, "Direct Opportunity Cost", format_usd(self.direct_oc)),
            (4, "Trades", format_count(self.trades)),
            (5, "Diff. Trades", format_count(self.diff_trades)),
            (6, "Traded Value", format_usd(self.traded_value)),
            (7, "Diff. Traded Value", format_usd(self.diff_traded_value)),
            (8, "Percent Diff. Trades", opt(self.pct_diff_trades(), 2)),
            (9, "Percent Diff. Traded Value", opt(self.pct_diff_traded_value(), 2)),
            (10, "Ratio of 9 / 8", opt(self.ratio(), 4)),
        ]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "line,label,value,exact")?;
        let exact = [
            format_money_exact(self.roc),
            format_money_exact(self.sip_oc),
            format_money_exact(self.direct_oc),
            self.trades.to_string(),
            self.diff_trades.to_string(),
            format_money_exact(self.traded_value),
            format_money_exact(self.diff_traded_value),
            self.pct_diff_trades().map_or("NA".into(), |v| format!("{v:.12}")),
            self.pct_diff_traded_value().map_or("NA".into(), |v| format!("{v:.12}")),
            self.ratio().map_or("NA".into(), |v| format!("{v:.12}")),
        ];
        for ((n, label, value), exact) in self.lines().into_iter().zip(exact) {
            writeln!(w, "{n},{label},\"{value}\",{exact}")?;
        }
        Ok(())
    }
}

impl fmt::Display for PurseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines = self.lines();
        let width = lines.iter().map(|l| l.2.len()).max().unwrap_or(0);
        for (n, label, value) in lines {
            writeln!(f, "{n:>2}  {label:<28}{value:>width$}")?;
        }
        Ok(())
    }
}

pub const ROC_CSV_HEADER: &str =
    "symbol,ts_ns,seq,price_1e-4usd,volume,side_matched,roc_signed_1e-4usd,is_differing,included,exclusion,roc_usd";

pub fn write_roc_records<W: Write>(mut w: W, records: &[RocRecord]) -> std::io::Result<()> {
    writeln!(w, "{ROC_CSV_HEADER}")?;
    let mut line = String::with_capacity(128);
    for r in records {
        line.clear();
        let _ = writeln!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.symbol,
            r.ts.0,
            r.seq,
            r.price.0,
            r.volume,
            r.side_matched.map_or("", SipSide::tag),
            r.roc_signed,
            r.is_differing,
            r.included,
            r.exclusion.map_or("", Exclusion::tag),
            format_money_exact(r.roc_signed)
        );
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

pub const PURSE_CSV_HEADER: &str = "key,date,trades,traded_value_1e-4usd,diff_trades,diff_traded_value_1e-4usd,\
included_trades,included_shares,roc_total_1e-4usd,roc_sip_1e-4usd,roc_direct_1e-4usd,members,\
roc_per_share_usd,roc_per_share_mean_usd,traded_value_usd,roc_total_usd";

pub fn write_purse_rows<'a, W: Write>(mut w: W, rows: impl IntoIterator<Item = &'a PurseRow>) -> std::io::Result<()> {
    writeln!(w, "{PURSE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.10},{:.10},{},{}",
            r.key,
            r.date.format("%Y-%m-%d"),
            r.trades,
            r.traded_value,
            r.diff_trades,
            r.diff_traded_value,
            r.included_trades,
            r.included_shares,
            r.roc_total,
            r.roc_sip,
            r.roc_direct,
            r.members,
            r.roc_per_share(),
            r.roc_per_share_mean(),
            format_money_exact(r.traded_value),
            format_money_exact(r.roc_total)
        )?;
    }
    w.flush()
}

pub fn read_purse_rows<R: Read>(input: R) -> Result<Vec<PurseRow>, (u64, String)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(|e| (1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != PURSE_CSV_HEADER {
        return Err((1, "unexpected purse CSV header".into()));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| (e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let err = |i: usize| (line, format!("field {i}: malformed value {:?}", &rec[i]));
        let u = |i: usize| rec[i].parse::<u64>().map_err(|_| err(i));
        let m = |i: usize| rec[i].parse::<Money>().map_err(|_| err(i));
        let members = u(11)?;
        let mean: f64 = rec[13].parse().map_err(|_| err(13))?;
        out.push(PurseRow {
            key: rec[0].to_string(),
            date: NaiveDate::parse_from_str(&rec[1], "%Y-%m-%d").map_err(|_| err(1))?,
            trades: u(2)?,
            traded_value: m(3)?,
            diff_trades: u(4)?,
            diff_traded_value: m(5)?,
            included_trades: u(6)?,
            included_shares: u(7)?,
            roc_total: m(8)?,
            roc_sip: m(9)?,
            roc_direct: m(10)?,
            members,
            roc_per_share_sum: mean * members as f64,
        });
    }
    Ok(out)
}
