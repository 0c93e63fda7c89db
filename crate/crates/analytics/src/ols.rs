//! Ordinary least squares with classical standard errors, for log-log
//! scaling regressions.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::AnalyticsError;
use crate::lstsq::lstsq;

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    /// Intercept first, then predictors, then squared terms when `quadratic`.
    pub coefficients: Vec<Coefficient>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub n: usize,
    pub quadratic: bool,
    /// `max |Xᵀ(y − Xβ̂)|`, zero up to rounding.
    pub orthogonality: f64,
    /// Rows dropped before fitting (see [`log10_rows`]).
    pub excluded: usize,
}

impl OlsFit {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// Fits `y ~ 1 + columns (+ columns²)`. Column names label the output; squared
/// terms are named `name^2`.
pub fn ols_fit(names: &[&str], columns: &[Vec<f64>], y: &[f64], quadratic: bool) -> Result<OlsFit, AnalyticsError> {
    if names.len() != columns.len() {
        return Err(AnalyticsError::Invalid("one name per column".into()));
    }
    let n = y.len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(AnalyticsError::LengthMismatch(n, c.len()));
    }
    let mut labels = vec!["const".to_string()];
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for (name, c) in names.iter().zip(columns) {
        labels.push(name.to_string());
        cols.push(c.clone());
    }
    if quadratic {
        for (name, c) in names.iter().zip(columns) {
            labels.push(format!("{name}^2"));
            cols.push(c.iter().map(|v| v * v).collect());
        }
    }
    let k = cols.len();
    if n <= k {
        return Err(AnalyticsError::TooShort { needed: k + 1, got: n });
    }
    let x = DMatrix::from_fn(n, k, |r, c| cols[c][r]);
    let yv = DVector::from_column_slice(y);
    let ls = lstsq(&x, &yv).map_err(|j| AnalyticsError::RankDeficient { column: labels[j.min(k - 1)].clone() })?;

    let df = (n - k) as f64;
    let sigma2 = ls.ssr / df;
    let normal = Normal::standard();
    let coefficients = (0..k)
        .map(|j| {
            let estimate = ls.beta[j];
            let std_error = (sigma2 * ls.xtx_inv[(j, j)]).max(0.0).sqrt();
            let z = estimate / std_error;
            let p = if z.is_nan() { f64::NAN } else { 2.0 * normal.sf(z.abs()) };
            Coefficient {
                name: labels[j].clone(),
                estimate,
                std_error,
                z,
                p,
                ci_low: estimate - Z_975 * std_error,
                ci_high: estimate + Z_975 * std_error,
            }
        })
        .collect();
    let my = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let r_squared = if sst > 0.0 { (1.0 - ls.ssr / sst).clamp(0.0, 1.0) } else { 1.0 };
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df;
    let orthogonality = (x.transpose() * &ls.residuals).amax();
    Ok(OlsFit { coefficients, r_squared, adj_r_squared, n, quadratic, orthogonality, excluded: 0 })
}

/// Log₁₀ of every field of each row, dropping rows where any field is not
/// strictly positive. Returns `(columns, response, excluded)`.
pub fn log10_rows(predictors: &[Vec<f64>], response: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, usize) {
    let mut cols = vec![Vec::new(); predictors.len()];
    let mut y = Vec::new();
    let mut excluded = 0;
    for (i, r) in response.iter().enumerate() {
        let ok = *r > 0.0 && predictors.iter().all(|c| c[i] > 0.0);
        if !ok {
            excluded += 1;
            continue;
        }
        for (dst, src) in cols.iter_mut().zip(predictors) {
            dst.push(src[i].log10());
        }
        y.push(r.log10());
    }
    (cols, y, excluded)
}

impl fmt::Display for OlsFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}  excluded = {}  R² = {:.3}  adj. R² = {:.3}", self.n, self.excluded, self.r_squared, self.adj_r_squared)?;
        writeln!(f, "{:<24}{:>12}{:>12}{:>10}{:>10}{:>12}{:>12}", "", "coef", "std err", "z", "P>|z|", "[0.025", "0.975]")?;
        for c in &self.coefficients {
            writeln!(
                f,
                "{:<24}{:>12.4}{:>12.4}{:>10.3}{:>10.3}{:>12.4}{:>12.4}",
                c.name, c.estimate, c.std_error, c.z, c.p, c.ci_low, c.ci_high
            )?;
        }
        Ok(())
    }
}
