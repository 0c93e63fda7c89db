use std::io::Write;

use disloc_core::detect::Side;
use disloc_core::pipeline::run_events;
use disloc_core::sim::replay_figure2;
use disloc_core::{DislocationSegment, Price};

use crate::error::CliError;

/// The replayed scenario must yield exactly this: one BID segment, 97 µs, 1¢.
pub fn check(segments: &[DislocationSegment]) -> bool {
    matches!(segments, [s] if s.side == Side::Bid
        && s.duration_ns() == 97_000
        && s.min_magnitude == Price::from_cents(1)
        && s.max_magnitude == Price::from_cents(1)
        && !s.truncated)
}

pub fn run(stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = replay_figure2();
    let out = run_events(&f.events, None)?;
    let io = |e: std::io::Error| CliError::internal(format!("stdout: {e}"));
    for t in &f.trace {
        writeln!(stdout, "step {}  +{:>7} ns  {}", t.step, t.offset_ns, t.what).map_err(io)?;
    }
    for s in &out.segments {
        writeln!(
            stdout,
            "segment {} {} {} start={} end={} duration_ns={} min_mag=${:.2} max_mag=${:.2}",
            s.symbol,
            s.side,
            s.ordering,
            s.start.0,
            s.end.0,
            s.duration_ns(),
            s.min_magnitude.to_usd(),
            s.max_magnitude.to_usd()
        )
        .map_err(io)?;
    }
    let pass = check(&out.segments) && out.segments == [f.expected];
    writeln!(stdout, "{}", if pass { "PASS" } else { "FAIL" }).map_err(io)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::internal(format!("expected exactly one segment {:?}", f.expected)))
    }
}
