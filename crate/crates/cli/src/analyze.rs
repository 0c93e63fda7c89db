use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use disloc_analytics::circle::write_circle_csv;
use disloc_analytics::hist::chi_square_uniform;
use disloc_analytics::moments::standardize;
use disloc_analytics::{
    category_series, circleplot_export, dfa_exponent, duration_histogram, granger_tests, log10_rows, ols_fit,
    pearson_matrix, rank_by, skew_kurtosis, start_time_histogram, LagOutcome, Metric, OlsFit,
};
use disloc_core::detect::{read_segments, summarize};
use disloc_core::roc::{money_to_usd, PurseRow};
use disloc_core::{Category, DislocationSegment, Symbol, SymbolMeta};

use crate::error::{CliError, Kind};
use crate::files::{ensure_dir, open_input, write_file, write_manifest};
use crate::report::{load_meta, load_purse};
use crate::SessionWindow;

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Segment CSV files (any of the `detect` outputs).
    #[arg(long, num_args = 1..)]
    pub segments: Vec<PathBuf>,
    /// Purse CSV files with per-symbol rows.
    #[arg(long, num_args = 1..)]
    pub purse: Vec<PathBuf>,
    /// Symbol table; needed for category statistics and regressions.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub window: SessionWindow,
    /// Start-time histogram bin width, seconds; must divide the session length.
    #[arg(long, default_value_t = 60)]
    pub bin_s: u64,
    /// Duration histogram resolution.
    #[arg(long, default_value_t = 10)]
    pub bins_per_decade: u32,
    /// Granger lags 1..=max_lag, Bonferroni-corrected.
    #[arg(long, default_value_t = 40)]
    pub max_lag: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Names listed at each end of the rankings.
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
}

type Meta = BTreeMap<Symbol, SymbolMeta>;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn load_segments(paths: &[PathBuf]) -> Result<Vec<DislocationSegment>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        let segs = read_segments(open_input(p)?).map_err(|(line, m)| CliError::format(p, Some(line), m))?;
        out.extend(segs);
    }
    Ok(out)
}

fn segment_outputs(args: &AnalyzeArgs, segs: &[DislocationSegment], meta: Option<&Meta>, notes: &mut Vec<String>) -> Result<(), CliError> {
    let w = args.window;
    let bin_ns = args.bin_s.checked_mul(1_000_000_000).unwrap_or(0);
    let start = start_time_histogram(segs, bin_ns, w.session_open_ns, w.session_length_ns)
        .map_err(|e| CliError::new(Kind::Usage, e.to_string()))?;
    write_file(&args.out.join("start_histogram.csv"), |f| start.write_csv(f))?;
    match chi_square_uniform(&start.counts) {
        Some((chi, p)) => notes.push(format!(
            "start times: chi2 vs uniform = {chi:.3} over {} bins, p = {p:.4}; {} outside the session",
            start.counts.len(),
            start.outside
        )),
        None => notes.push("start times: no segments inside the session window".into()),
    }
    let dur = duration_histogram(segs, args.bins_per_decade).map_err(|e| CliError::new(Kind::Usage, e.to_string()))?;
    write_file(&args.out.join("duration_histogram.csv"), |f| dur.write_csv(f))?;
    if dur.zero_excluded > 0 {
        notes.push(format!("durations: {} zero-length segments left out of the log histogram", dur.zero_excluded));
    }
    let circle = circleplot_export(segs, w.session_open_ns, w.session_length_ns);
    write_file(&args.out.join("circle.csv"), |f| write_circle_csv(f, &circle))?;

    let mut groups: Vec<(String, Vec<DislocationSegment>)> = vec![("ALL".into(), segs.to_vec())];
    if let Some(meta) = meta {
        let mut by: BTreeMap<Category, Vec<DislocationSegment>> = BTreeMap::new();
        for s in segs {
            if let Some(m) = meta.get(&s.symbol) {
                by.entry(m.category).or_default().push(*s);
            }
        }
        groups.extend(by.into_iter().map(|(c, v)| (c.tag().to_string(), v)));
    }
    write_file(&args.out.join("segment_summary.csv"), |f| {
        writeln!(f, "group,stat,min_magnitude_usd,max_magnitude_usd,duration_s")?;
        for (g, v) in &groups {
            summarize(v).write_csv(&mut *f, g)?;
        }
        Ok(())
    })
}

fn rankings(args: &AnalyzeArgs, rows: &[PurseRow], meta: &Meta) -> Result<(), CliError> {
    write_file(&args.out.join("rankings.csv"), |f| {
        writeln!(f, "metric,end,rank,ticker,category,value")?;
        for m in Metric::ALL {
            let r = rank_by(rows, meta, m, args.top_k, args.top_k);
            for (end, list) in [("top", &r.top), ("bottom", &r.bottom)] {
                for x in list {
                    let cat = x.category.map_or("", |c| c.tag());
                    writeln!(f, "{},{end},{},{},{cat},{}", m.tag(), x.rank, x.ticker, x.value)?;
                }
            }
        }
        Ok(())
    })
}

#[derive(Default)]
struct SeriesTables {
    series: Vec<String>,
    moments: Vec<String>,
    dfa: Vec<String>,
    pearson: Vec<String>,
    granger: Vec<String>,
}

fn series_stats(args: &AnalyzeArgs, rows: &[PurseRow], meta: &Meta, notes: &mut Vec<String>) -> SeriesTables {
    let mut t = SeriesTables::default();
    for metric in Metric::ALL {
        let tag = metric.tag();
        let series = category_series(rows, meta, metric);
        let mut normalized: Vec<(Category, Vec<f64>)> = Vec::new();
        for (cat, s) in &series {
            let values = s.values();
            let z = match standardize(&values, cat.tag()) {
                Ok(z) => Some(z),
                Err(e) => {
                    notes.push(format!("{tag} {}: not normalized: {e}", cat.tag()));
                    None
                }
            };
            for (i, (date, v)) in s.points.iter().enumerate() {
                t.series.push(format!("{tag},{},{date},{v},{}", cat.tag(), opt(z.as_ref().map(|z| z[i]))));
            }
            let Some(z) = z else { continue };
            match skew_kurtosis(&values) {
                Ok((sk, ku)) => t.moments.push(format!("{tag},{},{},{sk},{ku}", cat.tag(), values.len())),
                Err(e) => notes.push(format!("{tag} {}: moments: {e}", cat.tag())),
            }
            match dfa_exponent(&z, None) {
                Ok(d) => t.dfa.push(format!("{tag},{},{},{},{}", cat.tag(), z.len(), d.sizes.len(), d.alpha)),
                Err(e) => notes.push(format!("{tag} {}: DFA: {e}", cat.tag())),
            }
            normalized.push((*cat, z));
        }
        if normalized.len() >= 2 {
            let refs: Vec<&[f64]> = normalized.iter().map(|(_, z)| z.as_slice()).collect();
            match pearson_matrix(&refs) {
                Ok(m) => {
                    for (i, (a, _)) in normalized.iter().enumerate() {
                        for (j, (b, _)) in normalized.iter().enumerate() {
                            t.pearson.push(format!("{tag},{},{},{}", a.tag(), b.tag(), opt(m[i][j])));
                        }
                    }
                }
                Err(e) => notes.push(format!("{tag}: correlations: {e}")),
            }
        }
        for (a, x) in &normalized {
            for (b, y) in &normalized {
                if a == b {
                    continue;
                }
                match granger_tests(a.tag(), x, b.tag(), y, args.max_lag, args.alpha) {
                    Ok(g) => {
                        let th = g.threshold();
                        for o in &g.lags {
                            match o {
                                LagOutcome::Tested(l) => t.granger.push(format!(
                                    "{tag},{},{},{},{},{},{},{},{}",
                                    a.tag(),
                                    b.tag(),
                                    l.lag,
                                    l.ssr_chi2.1,
                                    l.lr.1,
                                    l.ssr_f.1,
                                    l.wald.1,
                                    l.max_p() < th
                                )),
                                LagOutcome::Untestable => {}
                            }
                        }
                        let untestable = g.lags.iter().filter(|o| matches!(o, LagOutcome::Untestable)).count();
                        if untestable > 0 {
                            notes.push(format!("{tag} {} -> {}: {untestable} lag(s) untestable (rank deficient)", a.tag(), b.tag()));
                        }
                    }
                    Err(e) => {
                        notes.push(format!("{tag} {} -> {}: Granger: {e}", a.tag(), b.tag()));
                    }
                }
            }
        }
    }
    t
}

/// Per-symbol totals: `(ticker, market cap, differing trades, trades, ROC USD)`.
fn symbol_totals(rows: &[PurseRow], meta: &Meta) -> Vec<(String, f64, f64, f64, f64)> {
    let mut per: BTreeMap<&str, PurseRow> = BTreeMap::new();
    for r in rows {
        per.entry(r.key.as_str()).or_insert_with(|| PurseRow::empty(r.key.clone(), r.date)).merge(r);
    }
    per.into_iter()
        .filter_map(|(k, r)| {
            let mc = Symbol::new(k).ok().and_then(|s| meta.get(&s)).and_then(|m| m.market_cap)?;
            Some((k.to_string(), mc as f64, r.diff_trades as f64, r.trades as f64, money_to_usd(r.roc_total)))
        })
        .collect()
}

fn regressions(rows: &[PurseRow], meta: &Meta, notes: &mut Vec<String>) -> Vec<(&'static str, OlsFit)> {
    let totals = symbol_totals(rows, meta);
    let predictors = vec![
        totals.iter().map(|t| t.1).collect::<Vec<_>>(),
        totals.iter().map(|t| t.2).collect(),
        totals.iter().map(|t| t.3).collect(),
    ];
    let y: Vec<f64> = totals.iter().map(|t| t.4).collect();
    let (cols, ly, excluded) = log10_rows(&predictors, &y);
    let names = ["log10_market_cap", "log10_diff_trades", "log10_trades"];
    let mut fits = Vec::new();
    for (label, quadratic) in [("linear", false), ("quadratic", true)] {
        match ols_fit(&names, &cols, &ly, quadratic) {
            Ok(mut f) => {
                f.excluded = excluded;
                fits.push((label, f));
            }
            Err(e) => notes.push(format!("OLS {label}: {e} ({} symbols with market cap, {excluded} excluded)", totals.len())),
        }
    }
    fits
}

fn write_lines(path: PathBuf, header: &str, lines: &[String]) -> Result<(), CliError> {
    write_file(&path, |f| {
        writeln!(f, "{header}")?;
        for l in lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    })
}

pub fn run(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if args.segments.is_empty() && args.purse.is_empty() {
        return Err(CliError::new(Kind::Usage, "analyze needs --segments and/or --purse"));
    }
    args.window.validate()?;
    let meta = load_meta(args.meta.as_deref())?;
    ensure_dir(&args.out)?;
    let mut notes = Vec::new();
    if !args.segments.is_empty() {
        let segs = load_segments(&args.segments)?;
        segment_outputs(args, &segs, meta.as_ref(), &mut notes)?;
    }
    if !args.purse.is_empty() {
        let rows = load_purse(&args.purse)?;
        let empty = Meta::new();
        rankings(args, &rows, meta.as_ref().unwrap_or(&empty))?;
        match &meta {
            Some(meta) => {
                let t = series_stats(args, &rows, meta, &mut notes);
                let out = &args.out;
                write_lines(out.join("series.csv"), "metric,category,date,value,normalized", &t.series)?;
                write_lines(out.join("moments.csv"), "metric,category,n,skew,kurtosis", &t.moments)?;
                write_lines(out.join("dfa.csv"), "metric,category,n,box_sizes,alpha", &t.dfa)?;
                write_lines(out.join("pearson.csv"), "metric,row,col,r", &t.pearson)?;
                write_lines(out.join("granger.csv"), "metric,cause,effect,lag,p_ssr_chi2,p_lr,p_ssr_f,p_wald,significant", &t.granger)?;
                let fits = regressions(&rows, meta, &mut notes);
                write_file(&out.join("ols.txt"), |f| {
                    for (label, fit) in &fits {
                        writeln!(f, "log10 ROC, {label} model\n{fit}")?;
                    }
                    Ok(())
                })?;
                let mut lines = Vec::new();
                for (label, fit) in &fits {
                    for c in &fit.coefficients {
                        lines.push(format!(
                            "{label},{},{},{},{},{},{},{},{},{}",
                            c.name, c.estimate, c.std_error, c.z, c.p, c.ci_low, c.ci_high, fit.r_squared, fit.n
                        ));
                    }
                }
                write_lines(out.join("ols.csv"), "model,term,coef,std_err,z,p,ci_low,ci_high,r_squared,n", &lines)?;
            }
            None => notes.push("no --meta: category series, DFA, Granger, correlations and regressions skipped".into()),
        }
    }
    write_lines(args.out.join("notes.txt"), "# analyze notes", &notes)?;
    write_manifest(&args.out)?;
    let _ = writeln!(stdout, "analyze: wrote {} ({} note(s))", args.out.display(), notes.len());
    Ok(())
}
