//! Polar export of segments for intraday circle plots.

use std::f64::consts::TAU;
use std::io::Write;

use disloc_core::model::NANOS_PER_DAY;
use disloc_core::DislocationSegment;

#[derive(Clone, Debug, PartialEq)]
pub struct CirclePoint {
    pub start_ns: u64,
    /// Radians; 0 at the open, π at mid-session.
    pub angle: f64,
    /// Max magnitude, USD.
    pub radius: f64,
    /// Duration, seconds.
    pub weight: f64,
}

pub fn circle_angle(start_ns: u64, session_open_ns: u64, session_length_ns: u64) -> f64 {
    let tod = (start_ns % NANOS_PER_DAY) as f64;
    TAU * (tod - session_open_ns as f64) / session_length_ns as f64
}

pub fn circleplot_export(segments: &[DislocationSegment], session_open_ns: u64, session_length_ns: u64) -> Vec<CirclePoint> {
    segments
        .iter()
        .map(|s| CirclePoint {
            start_ns: s.start.0,
            angle: circle_angle(s.start.0, session_open_ns, session_length_ns),
            radius: s.max_magnitude.to_usd(),
            weight: s.duration_ns() as f64 / 1e9,
        })
        .collect()
}

pub fn write_circle_csv<W: Write>(mut w: W, points: &[CirclePoint]) -> std::io::Result<()> {
    writeln!(w, "start_ns,angle_rad,radius_usd,weight_s")?;
    for p in points {
        writeln!(w, "{},{},{},{}", p.start_ns, p.angle, p.radius, p.weight)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use disloc_core::{FeedOrder, Price, Side, Symbol, Timestamp};
    use std::f64::consts::PI;

    const OPEN: u64 = 34_200_000_000_000;
    const LEN: u64 = 23_400_000_000_000;

    #[test]
    fn midpoint_is_pi() {
        assert!((circle_angle(OPEN + LEN / 2, OPEN, LEN) - PI).abs() < 1e-12);
        assert_eq!(circle_angle(OPEN, OPEN, LEN), 0.0);
    }

    #[test]
    fn empty_export_has_header_only() {
        let mut out = Vec::new();
        write_circle_csv(&mut out, &circleplot_export(&[], OPEN, LEN)).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "start_ns,angle_rad,radius_usd,weight_s\n");
    }

    #[test]
    fn angles_invert_to_start_times() {
        let segs: Vec<DislocationSegment> = (0..1000u64)
            .map(|i| {
                let start = OPEN + (i * 23_399_999_987) % LEN;
                DislocationSegment {
                    symbol: Symbol::new("X").unwrap(),
                    side: Side::Offer,
                    ordering: FeedOrder::F1Greater,
                    start: Timestamp(start),
                    end: Timestamp(start + 1_000),
                    min_magnitude: Price(100),
                    max_magnitude: Price(300),
                    truncated: false,
                }
            })
            .collect();
        for (p, s) in circleplot_export(&segs, OPEN, LEN).iter().zip(&segs) {
            let back = OPEN as f64 + p.angle / TAU * LEN as f64;
            assert!((back - s.start.0 as f64).abs() < 1e-2, "{back} vs {}", s.start.0);
            assert_eq!(p.radius, 0.03);
            assert_eq!(p.weight, 1e-6);
        }
    }
}
