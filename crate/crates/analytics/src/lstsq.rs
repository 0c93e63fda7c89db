//! Least squares via Householder QR, with a rank check that names the first
//! column linearly dependent on the ones before it.

use nalgebra::{DMatrix, DVector};

/// Relative size of an R diagonal entry below which a column counts as dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub ssr: f64,
    /// (XᵀX)⁻¹, from R⁻¹R⁻ᵀ.
    pub xtx_inv: DMatrix<f64>,
}

/// Solves `min ‖y − Xβ‖²`; `Err(j)` when column `j` is (numerically) a linear
/// combination of columns `0..j`.
pub fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LeastSquares, usize> {
    let (n, k) = x.shape();
    if n < k {
        return Err(n);
    }
    let qr = x.clone().qr();
    let r = qr.r();
    for j in 0..k {
        let norm = x.column(j).norm();
        if r[(j, j)].abs() <= RANK_TOL * norm.max(f64::MIN_POSITIVE) || norm == 0.0 {
            return Err(j);
        }
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let rhs = qty.rows(0, k).into_owned();
    let beta = r.solve_upper_triangular(&rhs).ok_or(k)?;
    let residuals = y - x * &beta;
    let ssr = residuals.norm_squared();
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k)).ok_or(k)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    Ok(LeastSquares { beta, residuals, ssr, xtx_inv })
}
