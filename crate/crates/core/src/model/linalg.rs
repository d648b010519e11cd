use nalgebra::{DMatrix, DVector};

use super::RANK_TOL;
use crate::error::{Error, Result};

/// Euclidean norm of every column.
pub fn column_norms(a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(a.ncols(), a.column_iter().map(|c| c.norm()))
}

/// Largest and smallest singular values, `(σ_max, σ_min)`, over the `min(m, n)`
/// singular values of `m`.
pub fn extreme_singular_values(m: &DMatrix<f64>) -> (f64, f64) {
    if m.is_empty() {
        return (0.0, 0.0);
    }
    let sv = m.clone().singular_values();
    (sv.max(), sv.min())
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    extreme_singular_values(m).0
}

/// `max |M − Mᵀ|`.
pub fn symmetric_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Thin QR of `Aᵀ`: `Q` is `n×m` with orthonormal columns, `R` is `m×m` upper
/// triangular with a strictly positive diagonal, and `Q·R = Aᵀ`.
pub fn qr_of_transpose(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    if m > n {
        return Err(Error::Shape(format!("m = {m} exceeds n = {n}")));
    }
    let qr = a.transpose().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..m {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    let diag = r.diagonal();
    let largest = diag.amax();
    let smallest = diag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if largest == 0.0 || smallest <= RANK_TOL * largest {
        let ratio = if largest == 0.0 {
            0.0
        } else {
            smallest / largest
        };
        return Err(Error::RankDeficient { ratio });
    }
    Ok((q, r))
}
