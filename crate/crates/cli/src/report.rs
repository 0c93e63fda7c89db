use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use disloc_core::feed::load_symbol_meta;
use disloc_core::roc::{read_purse_rows, rollup, write_purse_rows, PurseReport, PurseRow};
use disloc_core::{Symbol, SymbolMeta};

use crate::error::CliError;
use crate::files::{ensure_dir, open_input, write_file, write_manifest};

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Purse CSV files written by `roc`.
    #[arg(long, required = true, num_args = 1..)]
    pub purse: Vec<PathBuf>,
    /// Symbol table; adds per-category rollups.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Where to write report.txt / report.csv; stdout only when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Reads purse rows, rejecting rows whose ROC split does not add up.
pub fn load_purse(paths: &[PathBuf]) -> Result<Vec<PurseRow>, CliError> {
    let mut rows = Vec::new();
    for p in paths {
        let got = read_purse_rows(open_input(p)?).map_err(|(line, m)| CliError::format(p, Some(line), m))?;
        for (i, r) in got.iter().enumerate() {
            if r.roc_total != r.roc_sip + r.roc_direct {
                // Header is line 1 and purse rows never span lines.
                return Err(CliError::format(p, Some(i as u64 + 2), "roc_total != roc_sip + roc_direct"));
            }
        }
        rows.extend(got);
    }
    Ok(rows)
}

pub fn load_meta(path: Option<&Path>) -> Result<Option<BTreeMap<Symbol, SymbolMeta>>, CliError> {
    path.map(|p| load_symbol_meta(p).map_err(CliError::from)).transpose()
}

/// Symbol rows merged into one row per (category, date).
pub fn category_rows(rows: &[PurseRow], meta: &BTreeMap<Symbol, SymbolMeta>) -> Vec<PurseRow> {
    rollup(rows, |r| Symbol::new(&r.key).ok().and_then(|s| meta.get(&s)).map(|m| m.category.tag().to_string()))
        .into_values()
        .collect()
}

pub fn run(args: &ReportArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows = load_purse(&args.purse)?;
    let meta = load_meta(args.meta.as_deref())?;
    let report = PurseReport::from_rows(&rows);
    if !report.identities_hold() {
        return Err(CliError::internal("ROC total differs from SIP + direct opportunity cost"));
    }
    let _ = write!(stdout, "{report}");
    let Some(out) = &args.out else { return Ok(()) };
    ensure_dir(out)?;
    write_file(&out.join("report.txt"), |w| write!(w, "{report}"))?;
    write_file(&out.join("report.csv"), |w| report.write_csv(w))?;
    if let Some(meta) = &meta {
        let cats = category_rows(&rows, meta);
        write_file(&out.join("purse_by_category.csv"), |w| write_purse_rows(w, &cats))?;
        let mut by_cat: BTreeMap<&str, Vec<&PurseRow>> = BTreeMap::new();
        for r in &cats {
            by_cat.entry(r.key.as_str()).or_default().push(r);
        }
        write_file(&out.join("report_by_category.csv"), |w| {
            writeln!(w, "category,line,label,value")?;
            for (cat, rs) in &by_cat {
                for (n, label, value) in PurseReport::from_rows(rs.iter().copied()).lines() {
                    writeln!(w, "{cat},{n},{label},\"{value}\"")?;
                }
            }
            Ok(())
        })?;
    }
    write_manifest(out)
}
