//! Intraday start-time and log-duration histograms of dislocation segments.

use std::io::Write;

use disloc_core::model::NANOS_PER_DAY;
use disloc_core::DislocationSegment;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::AnalyticsError;

#[derive(Clone, Debug, PartialEq)]
pub struct StartHistogram {
    pub session_open_ns: u64,
    pub bin_ns: u64,
    pub counts: Vec<u64>,
    /// Segments starting outside the session window.
    pub outside: u64,
}

/// Counts segment starts (time of day) per `bin_ns` bin of the session,
/// summed over all days present.
pub fn start_time_histogram(
    segments: &[DislocationSegment],
    bin_ns: u64,
    session_open_ns: u64,
    session_length_ns: u64,
) -> Result<StartHistogram, AnalyticsError> {
    if bin_ns == 0 || session_length_ns % bin_ns != 0 {
        return Err(AnalyticsError::Invalid(format!("bin width {bin_ns} ns must divide the session length {session_length_ns} ns")));
    }
    let mut counts = vec![0u64; (session_length_ns / bin_ns) as usize];
    let mut outside = 0;
    for s in segments {
        let tod = s.start.0 % NANOS_PER_DAY;
        match tod.checked_sub(session_open_ns) {
            Some(off) if off < session_length_ns => counts[(off / bin_ns) as usize] += 1,
            _ => outside += 1,
        }
    }
    Ok(StartHistogram { session_open_ns, bin_ns, counts, outside })
}

impl StartHistogram {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_start_ns,bin_end_ns,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            let lo = self.session_open_ns + i as u64 * self.bin_ns;
            writeln!(w, "{lo},{},{c}", lo + self.bin_ns)?;
        }
        Ok(())
    }
}

/// Pearson χ² statistic and p-value against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> Option<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return None;
    }
    let e = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = ChiSquared::new((counts.len() - 1) as f64).ok()?.sf(stat);
    Some((stat, p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DurationHistogram {
    pub bins_per_decade: u32,
    /// log₁₀(seconds) of the lower edge of bin 0, in units of 1/bins_per_decade.
    pub first_bin: i64,
    pub counts: Vec<u64>,
    /// Zero-duration segments, which have no logarithm.
    pub zero_excluded: u64,
}

impl DurationHistogram {
    /// Half-open `[lo, hi)` edges in log₁₀ seconds of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let k = self.bins_per_decade as f64;
        let lo = (self.first_bin + i as i64) as f64 / k;
        (lo, lo + 1.0 / k)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "log10_s_low,log10_s_high,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.edges(i);
            writeln!(w, "{lo},{hi},{c}")?;
        }
        Ok(())
    }
}

/// Bin index (in 1/k decades of seconds) of a positive duration in ns.
/// Decades are found with integer arithmetic so powers of ten land exactly on
/// a lower edge.
fn log_bin(ns: u64, k: u32) -> i64 {
    let digits = ns.ilog10() as i64;
    let base = 10u64.pow(digits as u32);
    let frac = ((ns as f64) / (base as f64)).log10();
    let sub = ((frac * k as f64).floor() as i64).clamp(0, k as i64 - 1);
    (digits - 9) * k as i64 + sub
}

pub fn duration_histogram(segments: &[DislocationSegment], bins_per_decade: u32) -> Result<DurationHistogram, AnalyticsError> {
    if bins_per_decade == 0 {
        return Err(AnalyticsError::Invalid("bins_per_decade must be positive".into()));
    }
    let mut zero_excluded = 0;
    let bins: Vec<i64> = segments
        .iter()
        .filter_map(|s| {
            let d = s.duration_ns();
            if d == 0 {
                zero_excluded += 1;
                None
            } else {
                Some(log_bin(d, bins_per_decade))
            }
        })
        .collect();
    let (lo, hi) = match (bins.iter().min(), bins.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Ok(DurationHistogram { bins_per_decade, first_bin: 0, counts: Vec::new(), zero_excluded }),
    };
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for b in bins {
        counts[(b - lo) as usize] += 1;
    }
    Ok(DurationHistogram { bins_per_decade, first_bin: lo, counts, zero_excluded })
}
