use std::io::Write;

use chrono::NaiveDate;
use clap::Args;
use disloc_core::detect::{condition, summarize, write_segments, Conditioning, SegmentSummary};
use disloc_core::pipeline::{run_files, FileRun, PipelineOptions};
use disloc_core::roc::{aggregate_purse, write_purse_rows, write_roc_records, PurseRow};
use disloc_core::{Price, Timestamp};

use crate::error::{CliError, Kind};
use crate::files::{ensure_dir, resolve_sessions, session_dir, write_file, write_manifest, Session};
use crate::SessionArgs;

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Duration floor in µs; segments must last strictly longer.
    #[arg(long, default_value_t = 545.0)]
    pub duration_us: f64,
    /// Magnitude floor in cents; the segment's minimum magnitude must exceed it.
    #[arg(long, default_value_t = 1.0)]
    pub magnitude_cents: f64,
    /// Keep segments cut off by the session end in the conditioned sets.
    #[arg(long)]
    pub include_truncated: bool,
}

impl DetectArgs {
    /// `(duration-only, duration and magnitude)` filters.
    pub fn conditioning(&self) -> Result<(Conditioning, Conditioning), CliError> {
        let scaled = |v: f64, k: f64, flag: &str| {
            if v.is_finite() && v >= 0.0 && v * k < 9.0e18 {
                Ok((v * k).round() as u64)
            } else {
                Err(CliError::new(Kind::Usage, format!("--{flag} must be a non-negative number")))
            }
        };
        let dur = scaled(self.duration_us, 1_000.0, "duration-us")?;
        let mag = Price(scaled(self.magnitude_cents, 100.0, "magnitude-cents")? as i64);
        let include_truncated = self.include_truncated;
        Ok((
            Conditioning { include_truncated, ..Conditioning::duration(dur) },
            Conditioning { include_truncated, ..Conditioning::duration_and_magnitude(dur, mag) },
        ))
    }
}

fn run_session(args: &SessionArgs, s: &Session) -> Result<FileRun, CliError> {
    let opts = PipelineOptions { session_end: args.session_end_ns.map(Timestamp), threads: args.threads.max(1) };
    Ok(run_files(&s.files, &opts)?)
}

fn summary_csv(w: &mut dyn Write, sets: &[(&str, SegmentSummary)]) -> std::io::Result<()> {
    writeln!(w, "set,stat,min_magnitude_usd,max_magnitude_usd,duration_s")?;
    for (label, s) in sets {
        s.write_csv(&mut *w, label)?;
    }
    Ok(())
}

pub fn run(args: &DetectArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (dur, both) = args.conditioning()?;
    let sessions = resolve_sessions(&args.session.inputs)?;
    for s in &sessions {
        let run = run_session(&args.session, s)?;
        let all = run.output.segments;
        let d = condition(&all, &dur);
        let c = condition(&all, &both);
        let dir = session_dir(&args.session.out, s);
        ensure_dir(&dir)?;
        write_file(&dir.join("segments.csv"), |w| write_segments(w, &all))?;
        write_file(&dir.join("segments_duration.csv"), |w| write_segments(w, &d))?;
        write_file(&dir.join("segments_conditioned.csv"), |w| write_segments(w, &c))?;
        let sets = [("unconditioned", summarize(&all)), ("duration", summarize(&d)), ("duration_magnitude", summarize(&c))];
        write_file(&dir.join("segment_summary.csv"), |w| summary_csv(w, &sets))?;
        let _ = writeln!(
            stdout,
            "detect {}: {} events, {} segments, {} > duration floor, {} > both floors",
            s.label.as_deref().unwrap_or("session"),
            run.output.events,
            all.len(),
            d.len(),
            c.len()
        );
    }
    write_manifest(&args.session.out)
}

/// Header date, else `--date`, else a date-named day directory.
fn purse_date(args: &SessionArgs, s: &Session, header: Option<NaiveDate>) -> Result<NaiveDate, CliError> {
    if let (Some(h), Some(d)) = (header, args.date) {
        if h != d {
            return Err(CliError::new(Kind::Format, format!("--date {d} contradicts file header date {h}")));
        }
    }
    header
        .or(args.date)
        .or_else(|| s.label.as_deref().and_then(|l| l.parse().ok()))
        .ok_or_else(|| CliError::new(Kind::Missing, "session date unknown: event files have no header, pass --date"))
}

pub fn run_roc(args: &SessionArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let sessions = resolve_sessions(&args.inputs)?;
    let mut all_rows: Vec<PurseRow> = Vec::new();
    for s in &sessions {
        let run = run_session(args, s)?;
        let date = purse_date(args, s, run.date)?;
        let records = run.output.records;
        let rows = aggregate_purse(&records, date);
        let dir = session_dir(&args.out, s);
        ensure_dir(&dir)?;
        write_file(&dir.join("roc_records.csv"), |w| write_roc_records(w, &records))?;
        write_file(&dir.join("purse.csv"), |w| write_purse_rows(w, rows.values()))?;
        let included = records.iter().filter(|r| r.included).count();
        let _ = writeln!(
            stdout,
            "roc {}: {} trades, {} differing, {} included, {} symbols",
            s.label.as_deref().unwrap_or("session"),
            records.len(),
            records.iter().filter(|r| r.is_differing).count(),
            included,
            rows.len()
        );
        all_rows.extend(rows.into_values());
    }
    if sessions.iter().any(|s| s.label.is_some()) {
        all_rows.sort_by(|a, b| (&a.key, a.date).cmp(&(&b.key, b.date)));
        write_file(&args.out.join("purse.csv"), |w| write_purse_rows(w, &all_rows))?;
    }
    write_manifest(&args.out)
}
