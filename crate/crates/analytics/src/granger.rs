//! Pairwise Granger causality, one pair of regressions per lag.
//!
//! For lag `ℓ`, with `n = N − ℓ` usable observations, the restricted model
//! regresses `y_t` on a constant and `y_{t−1..t−ℓ}`; the unrestricted model adds
//! `x_{t−1..t−ℓ}`. With `k = 2ℓ + 1` unrestricted parameters:
//!
//! | test      | statistic                               | reference     |
//! |-----------|-----------------------------------------|---------------|
//! | SSR F     | `(SSR_r − SSR_u)/SSR_u · (n − k)/ℓ`      | `F(ℓ, n − k)` |
//! | SSR χ²    | `n (SSR_r − SSR_u)/SSR_u`               | `χ²(ℓ)`       |
//! | LR        | `n ln(SSR_r / SSR_u)`                   | `χ²(ℓ)`       |
//! | Wald      | `(Rβ)ᵀ (R V Rᵀ)⁻¹ (Rβ)`, `V = σ²(XᵀX)⁻¹`, `σ² = SSR_u/(n − k)` | `χ²(ℓ)` |
//!
//! A lag is significant when all four p-values are below `α / max_lag`.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::AnalyticsError;
use crate::lstsq::lstsq;

#[derive(Clone, Debug, PartialEq)]
pub struct LagTest {
    pub lag: usize,
    pub ssr_chi2: (f64, f64),
    pub lr: (f64, f64),
    pub ssr_f: (f64, f64),
    pub wald: (f64, f64),
}

impl LagTest {
    pub fn max_p(&self) -> f64 {
        [self.ssr_chi2.1, self.lr.1, self.ssr_f.1, self.wald.1].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LagOutcome {
    Tested(LagTest),
    /// A design at this lag was rank deficient.
    Untestable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrangerResult {
    pub cause: String,
    pub effect: String,
    pub alpha: f64,
    pub max_lag: usize,
    /// Index `ℓ − 1` holds lag `ℓ`.
    pub lags: Vec<LagOutcome>,
}

impl GrangerResult {
    /// Per-lag threshold after the Bonferroni correction.
    pub fn threshold(&self) -> f64 {
        self.alpha / self.max_lag as f64
    }

    pub fn significant_lags(&self) -> Vec<usize> {
        let th = self.threshold();
        self.lags
            .iter()
            .filter_map(|o| match o {
                LagOutcome::Tested(t) if t.max_p() < th => Some(t.lag),
                _ => None,
            })
            .collect()
    }

    pub fn is_significant(&self) -> bool {
        !self.significant_lags().is_empty()
    }
}

fn design(x: &[f64], y: &[f64], lag: usize, with_x: bool) -> DMatrix<f64> {
    let n = y.len() - lag;
    let k = if with_x { 2 * lag + 1 } else { lag + 1 };
    DMatrix::from_fn(n, k, |r, c| {
        let t = r + lag;
        match c {
            0 => 1.0,
            c if c <= lag => y[t - c],
            c => x[t - (c - lag)],
        }
    })
}

fn chi2_sf(stat: f64, df: usize) -> f64 {
    ChiSquared::new(df as f64).expect("df > 0").sf(stat.max(0.0))
}

fn test_lag(x: &[f64], y: &[f64], lag: usize) -> Option<LagTest> {
    let n = y.len() - lag;
    let k = 2 * lag + 1;
    if n <= k {
        return None;
    }
    let target = DVector::from_column_slice(&y[lag..]);
    let restricted = lstsq(&design(x, y, lag, false), &target).ok()?;
    let unrestricted = lstsq(&design(x, y, lag, true), &target).ok()?;
    let (ssr_r, ssr_u) = (restricted.ssr, unrestricted.ssr);
    if !(ssr_u > 0.0) {
        return None;
    }
    let nf = n as f64;
    let df_resid = (n - k) as f64;
    let l = lag as f64;
    let f = (ssr_r - ssr_u) / ssr_u * df_resid / l;
    let f_p = FisherSnedecor::new(l, df_resid).expect("positive dfs").sf(f.max(0.0));
    let chi = nf * (ssr_r - ssr_u) / ssr_u;
    let lr = nf * (ssr_r / ssr_u).ln();

    // Wald on the x-lag block of the unrestricted fit.
    let sigma2 = ssr_u / df_resid;
    let rb = unrestricted.beta.rows(lag + 1, lag).into_owned();
    let rvr = unrestricted.xtx_inv.view((lag + 1, lag + 1), (lag, lag)) * sigma2;
    let w = rvr.cholesky().map(|c| rb.dot(&c.solve(&rb)))?;

    Some(LagTest {
        lag,
        ssr_chi2: (chi, chi2_sf(chi, lag)),
        lr: (lr, chi2_sf(lr, lag)),
        ssr_f: (f, f_p),
        wald: (w, chi2_sf(w, lag)),
    })
}

/// Tests whether `x` Granger-causes `y` at lags `1..=max_lag`.
pub fn granger_tests(
    cause: &str,
    x: &[f64],
    effect: &str,
    y: &[f64],
    max_lag: usize,
    alpha: f64,
) -> Result<GrangerResult, AnalyticsError> {
    if x.len() != y.len() {
        return Err(AnalyticsError::LengthMismatch(x.len(), y.len()));
    }
    if max_lag == 0 {
        return Err(AnalyticsError::Invalid("max_lag must be positive".into()));
    }
    if y.len() < 3 * max_lag {
        return Err(AnalyticsError::TooShort { needed: 3 * max_lag, got: y.len() });
    }
    let lags = (1..=max_lag)
        .map(|l| test_lag(x, y, l).map_or(LagOutcome::Untestable, LagOutcome::Tested))
        .collect();
    Ok(GrangerResult { cause: cause.into(), effect: effect.into(), alpha, max_lag, lags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn design_layout() {
        let x = [10.0, 11.0, 12.0, 13.0];
        let y = [0.0, 1.0, 2.0, 3.0];
        let d = design(&x, &y, 2, true);
        assert_eq!(d.shape(), (2, 5));
        assert_eq!(d.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 0.0, 11.0, 10.0]);
    }

    #[test]
    fn wald_equals_lag_times_f_for_linear_restrictions() {
        let x = lcg(1, 300);
        let mut y = lcg(2, 300);
        for t in 1..300 {
            y[t] += 0.3 * x[t - 1];
        }
        for lag in [1, 3, 7] {
            let t = test_lag(&x, &y, lag).unwrap();
            assert!((t.wald.0 - lag as f64 * t.ssr_f.0).abs() < 1e-8 * t.wald.0.max(1.0));
            // LR sits between the two χ² forms' small-effect limits.
            assert!(t.lr.0 <= t.ssr_chi2.0);
        }
    }

    #[test]
    fn constant_cause_is_untestable() {
        let x = vec![1.0; 60];
        let y = lcg(3, 60);
        let r = granger_tests("x", &x, "y", &y, 4, 0.05).unwrap();
        assert!(r.lags.iter().all(|l| *l == LagOutcome::Untestable));
        assert!(!r.is_significant());
    }

    #[test]
    fn short_series_rejected() {
        let e = granger_tests("x", &[0.0; 10], "y", &[0.0; 10], 4, 0.05).unwrap_err();
        assert_eq!(e, AnalyticsError::TooShort { needed: 12, got: 10 });
    }

    #[test]
    fn decision_invariant_to_affine_rescaling() {
        let x = lcg(5, 200);
        let mut y = lcg(6, 200);
        for t in 2..200 {
            y[t] += 0.25 * x[t - 2];
        }
        let x2: Vec<f64> = x.iter().map(|v| 1000.0 * v - 3.0).collect();
        let y2: Vec<f64> = y.iter().map(|v| -0.01 * v + 42.0).collect();
        let a = granger_tests("x", &x, "y", &y, 5, 0.05).unwrap();
        let b = granger_tests("x", &x2, "y", &y2, 5, 0.05).unwrap();
        assert_eq!(a.significant_lags(), b.significant_lags());
        for (p, q) in a.lags.iter().zip(&b.lags) {
            if let (LagOutcome::Tested(p), LagOutcome::Tested(q)) = (p, q) {
                assert!((p.ssr_f.0 - q.ssr_f.0).abs() < 1e-6 * p.ssr_f.0.max(1.0));
            }
        }
    }
}
