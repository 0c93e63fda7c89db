//! Ranking symbols by an ROC metric.

use std::collections::BTreeMap;

use disloc_core::roc::PurseRow;
use disloc_core::{Category, Symbol, SymbolMeta};

use crate::series::Metric;

#[derive(Clone, Debug, PartialEq)]
pub struct Ranked {
    pub rank: usize,
    pub ticker: String,
    pub category: Option<Category>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ranking {
    pub metric: Metric,
    /// Highest first.
    pub top: Vec<Ranked>,
    /// The lowest `bottom_k`, still in descending order.
    pub bottom: Vec<Ranked>,
}

/// Merges symbol-day rows per ticker and ranks by `metric`, descending, ties
/// broken by ticker.
pub fn rank_by(rows: &[PurseRow], meta: &BTreeMap<Symbol, SymbolMeta>, metric: Metric, top_k: usize, bottom_k: usize) -> Ranking {
    let mut per: BTreeMap<&str, PurseRow> = BTreeMap::new();
    for r in rows {
        per.entry(r.key.as_str()).or_insert_with(|| PurseRow::empty(r.key.clone(), r.date)).merge(r);
    }
    let mut all: Vec<(f64, &str)> = per.iter().map(|(k, r)| (metric.of(r), *k)).collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let ranked: Vec<Ranked> = all
        .into_iter()
        .enumerate()
        .map(|(i, (value, t))| Ranked {
            rank: i + 1,
            ticker: t.to_string(),
            category: Symbol::new(t).ok().and_then(|s| meta.get(&s)).map(|m| m.category),
            value,
        })
        .collect();
    let top = ranked.iter().take(top_k).cloned().collect();
    let bottom = ranked[ranked.len().saturating_sub(bottom_k)..].to_vec();
    Ranking { metric, top, bottom }
}
