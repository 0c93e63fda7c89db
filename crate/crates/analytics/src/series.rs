//! Daily series per category (or symbol) built from purse rows.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use chrono::NaiveDate;
use disloc_core::roc::{money_to_usd, PurseRow};
use disloc_core::{Category, Symbol, SymbolMeta};

use crate::error::AnalyticsError;
use crate::moments::standardize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Σ|ROC| in USD.
    RocTotal,
    /// Share-weighted ROC per share, USD.
    RocPerShare,
    /// ROC as a fraction of traded value.
    RocPerTradedValue,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::RocTotal, Metric::RocPerShare, Metric::RocPerTradedValue];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::RocTotal => "roc_total",
            Metric::RocPerShare => "roc_per_share",
            Metric::RocPerTradedValue => "roc_per_traded_value",
        }
    }

    pub fn of(self, row: &PurseRow) -> f64 {
        match self {
            Metric::RocTotal => money_to_usd(row.roc_total),
            Metric::RocPerShare => row.roc_per_share(),
            Metric::RocPerTradedValue => row.roc_per_traded_value(),
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL.into_iter().find(|m| m.tag() == s).ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DailySeries {
    pub label: String,
    /// Strictly increasing dates.
    pub points: Vec<(NaiveDate, f64)>,
}

impl DailySeries {
    pub fn new(label: impl Into<String>, points: Vec<(NaiveDate, f64)>) -> Result<Self, AnalyticsError> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(AnalyticsError::Invalid("series dates must be strictly increasing".into()));
        }
        Ok(DailySeries { label: label.into(), points })
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `(r − ⟨r⟩)/σ` with the population σ; dates are kept.
pub fn normalize_series(s: &DailySeries) -> Result<DailySeries, AnalyticsError> {
    let z = standardize(&s.values(), &s.label)?;
    Ok(DailySeries { label: s.label.clone(), points: s.points.iter().zip(z).map(|(p, v)| (p.0, v)).collect() })
}

/// One series per category over every date present in `rows` (symbol-day
/// rows). A category with no trades on a date scores 0 that day. Symbols
/// missing from `meta` are skipped.
pub fn category_series(
    rows: &[PurseRow],
    meta: &BTreeMap<Symbol, SymbolMeta>,
    metric: Metric,
) -> BTreeMap<Category, DailySeries> {
    let dates: BTreeSet<NaiveDate> = rows.iter().map(|r| r.date).collect();
    let mut merged: BTreeMap<(Category, NaiveDate), PurseRow> = BTreeMap::new();
    for r in rows {
        let Some(m) = Symbol::new(&r.key).ok().and_then(|s| meta.get(&s)) else { continue };
        merged.entry((m.category, r.date)).or_insert_with(|| PurseRow::empty(m.category.tag(), r.date)).merge(r);
    }
    let cats: BTreeSet<Category> = merged.keys().map(|k| k.0).collect();
    cats.into_iter()
        .map(|c| {
            let points = dates.iter().map(|d| (*d, merged.get(&(c, *d)).map_or(0.0, |row| metric.of(row)))).collect();
            (c, DailySeries { label: c.tag().to_string(), points })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2016, 1, day).unwrap()
    }

    fn row(key: &str, day: u32, roc: i128, shares: u64) -> PurseRow {
        let mut r = PurseRow::empty(key, d(day));
        r.roc_total = roc;
        r.roc_sip = roc;
        r.included_shares = shares;
        r.trades = 1;
        r.traded_value = 1_000_000;
        r.seal_as_symbol();
        r
    }

    fn meta(t: &str, c: Category) -> (Symbol, SymbolMeta) {
        let s = Symbol::new(t).unwrap();
        (s, SymbolMeta { ticker: s, market_cap: None, sector: String::new(), category: c })
    }

    #[test]
    fn categories_fill_missing_days_with_zero() {
        let m: BTreeMap<_, _> = [meta("A", Category::Dow), meta("B", Category::Dow), meta("C", Category::RexSp)].into();
        let rows = vec![row("A", 4, 10_000, 10), row("B", 4, 30_000, 30), row("C", 5, 20_000, 1)];
        let s = category_series(&rows, &m, Metric::RocTotal);
        assert_eq!(s[&Category::Dow].points, vec![(d(4), 4.0), (d(5), 0.0)]);
        assert_eq!(s[&Category::RexSp].points, vec![(d(4), 0.0), (d(5), 2.0)]);
        let per_share = category_series(&rows, &m, Metric::RocPerShare);
        assert_eq!(per_share[&Category::Dow].points[0].1, 0.1);
    }

    #[test]
    fn dates_must_increase() {
        assert!(DailySeries::new("x", vec![(d(5), 1.0), (d(4), 2.0)]).is_err());
        let s = DailySeries::new("x", vec![(d(4), 1.0), (d(5), 3.0)]).unwrap();
        assert_eq!(normalize_series(&s).unwrap().values(), vec![-1.0, 1.0]);
    }
}
