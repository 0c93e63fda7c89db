//! Means, standardization, higher moments and correlation.

use crate::error::AnalyticsError;

/// Mean of the values whose flag is set; `None` when no value qualifies.
pub fn conditional_average(items: impl IntoIterator<Item = (f64, bool)>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (v, on) in items {
        if on {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// `(x − mean)/sd` with the population standard deviation.
pub fn standardize(xs: &[f64], label: &str) -> Result<Vec<f64>, AnalyticsError> {
    if xs.len() < 2 {
        return Err(AnalyticsError::TooShort { needed: 2, got: xs.len() });
    }
    let m = mean(xs);
    let var = variance(xs);
    if !(var > 0.0) {
        return Err(AnalyticsError::ZeroVariance(label.to_string()));
    }
    let sd = var.sqrt();
    Ok(xs.iter().map(|x| (x - m) / sd).collect())
}

/// Standardized third moment and (non-excess) fourth moment, from population moments.
pub fn skew_kurtosis(xs: &[f64]) -> Result<(f64, f64), AnalyticsError> {
    if xs.len() < 3 {
        return Err(AnalyticsError::TooShort { needed: 3, got: xs.len() });
    }
    let m = mean(xs);
    let n = xs.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if !(m2 > 0.0) {
        return Err(AnalyticsError::ZeroVariance("values".into()));
    }
    Ok((m3 / m2.powf(1.5), m4 / (m2 * m2)))
}

/// Pearson correlation; `None` if either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Symmetric correlation matrix; diagonal is 1 for series with variance and
/// `None` (undefined) otherwise.
pub fn pearson_matrix(series: &[&[f64]]) -> Result<Vec<Vec<Option<f64>>>, AnalyticsError> {
    let n = series.first().map_or(0, |s| s.len());
    if let Some(s) = series.iter().find(|s| s.len() != n) {
        return Err(AnalyticsError::LengthMismatch(n, s.len()));
    }
    if n < 2 {
        return Err(AnalyticsError::TooShort { needed: 2, got: n });
    }
    let k = series.len();
    let mut m = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = if i == j { (variance(series[i]) > 0.0).then_some(1.0) } else { pearson(series[i], series[j]) };
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}
