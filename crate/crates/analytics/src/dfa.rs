//! Detrended fluctuation analysis with first-order detrending.
//!
//! The series is mean-removed and integrated into a profile. For each box size
//! `n` the profile is cut into `⌊N/n⌋` non-overlapping boxes from the start, a
//! line is fitted in each box, and `F(n)` is the RMS of the residuals over all
//! boxes. The exponent is the least-squares slope of `ln F(n)` on `ln n`.

use crate::error::AnalyticsError;

#[derive(Clone, Debug, PartialEq)]
pub struct Dfa {
    pub alpha: f64,
    pub sizes: Vec<usize>,
    pub fluctuations: Vec<f64>,
}

/// About `count` log-spaced integer box sizes from 4 to `len/4`, deduplicated.
pub fn default_box_sizes(len: usize, count: usize) -> Vec<usize> {
    let (lo, hi) = (4.0f64, (len / 4) as f64);
    if hi < lo {
        return Vec::new();
    }
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            (lo * (hi / lo).powf(t)).round() as usize
        })
        .collect();
    out.dedup();
    out
}

fn box_fluctuation(profile: &[f64], n: usize) -> f64 {
    // x = 0..n−1 is the same in every box, so its moments are fixed.
    let nf = n as f64;
    let mx = (nf - 1.0) / 2.0;
    let sxx = nf * (nf * nf - 1.0) / 12.0;
    let boxes = profile.len() / n;
    let mut total = 0.0;
    for b in profile.chunks_exact(n).take(boxes) {
        let my = b.iter().sum::<f64>() / nf;
        let sxy: f64 = b.iter().enumerate().map(|(i, y)| (i as f64 - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        total += b
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let r = y - my - slope * (i as f64 - mx);
                r * r
            })
            .sum::<f64>();
    }
    (total / (boxes * n) as f64).sqrt()
}

/// DFA exponent over `sizes` (default: ~20 log-spaced sizes from 4 to N/4).
pub fn dfa_exponent(series: &[f64], sizes: Option<&[usize]>) -> Result<Dfa, AnalyticsError> {
    let sizes: Vec<usize> = match sizes {
        Some(s) => s.to_vec(),
        None => default_box_sizes(series.len(), 20),
    };
    let largest = sizes.iter().copied().max().unwrap_or(4).max(4);
    if sizes.len() < 2 || series.len() < 4 * largest {
        return Err(AnalyticsError::TooShort { needed: 4 * largest.max(4), got: series.len() });
    }
    if sizes.iter().any(|&n| n < 3) {
        return Err(AnalyticsError::Invalid("box sizes must be at least 3".into()));
    }
    let m = series.iter().sum::<f64>() / series.len() as f64;
    let mut acc = 0.0;
    let profile: Vec<f64> = series
        .iter()
        .map(|x| {
            acc += x - m;
            acc
        })
        .collect();
    let fluctuations: Vec<f64> = sizes.iter().map(|&n| box_fluctuation(&profile, n)).collect();
    if fluctuations.iter().any(|f| !(*f > 0.0)) {
        return Err(AnalyticsError::ZeroVariance("detrended profile".into()));
    }
    let lx: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = fluctuations.iter().map(|f| f.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(Dfa { alpha: sxy / sxx, sizes, fluctuations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes_span_four_to_quarter() {
        let s = default_box_sizes(4096, 20);
        assert_eq!(s[0], 4);
        assert_eq!(*s.last().unwrap(), 1024);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn too_short_names_minimum() {
        let err = dfa_exponent(&[1.0; 20], Some(&[4, 8])).unwrap_err();
        assert_eq!(err, AnalyticsError::TooShort { needed: 32, got: 20 });
    }

    #[test]
    fn box_fluctuation_matches_naive_fit() {
        let profile: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64 - 0.3 * i as f64).collect();
        let n = 8;
        // Naive per-box OLS with explicit normal equations.
        let mut ss = 0.0;
        for b in profile.chunks_exact(n) {
            let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let (sx, sy) = (xs.iter().sum::<f64>(), b.iter().sum::<f64>());
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(b).map(|(x, y)| x * y).sum();
            let nf = n as f64;
            let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
            let icpt = (sy - slope * sx) / nf;
            ss += xs.iter().zip(b).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum::<f64>();
        }
        let naive = (ss / 40.0).sqrt();
        assert!((box_fluctuation(&profile, n) - naive).abs() < 1e-12);
    }

    #[test]
    fn invariant_to_affine_transform() {
        let xs: Vec<f64> = (0..512).map(|i| ((i * 7919 + 13) % 101) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -4.0 * x + 9.0).collect();
        let a = dfa_exponent(&xs, None).unwrap().alpha;
        let b = dfa_exponent(&ys, None).unwrap().alpha;
        assert!((a - b).abs() < 1e-10);
    }
}
