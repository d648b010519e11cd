//! Distance from a subspace `W ⊆ ℝⁿ` to the ill-posed subspaces `Σ_m`.
//!
//! `d(W, Σ_m) = max(min ‖Π_W x‖, min ‖Π_{W⊥} x‖)` with both minima over unit
//! `x ≥ 0`. The second minimum vanishes exactly when `W` meets the nonnegative
//! orthant, the first when `W⊥` does; for a well-posed `W` one of them is zero and
//! the other is the sine of the angle one has to rotate `W` by to touch `Σ_m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{symmetric_defect, Subspace, ILL_TOL};
use crate::rng;

/// Support enumeration is exact up to this ambient dimension.
pub const MAX_EXACT_DIM: usize = 16;
const HEURISTIC_STARTS: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthantMin {
    /// `min xᵀMx` over unit `x ≥ 0`, evaluated as `‖Mx‖²` so that values near
    /// zero keep full relative accuracy.
    pub value: f64,
    pub argmin: DVector<f64>,
    /// True when the projected-gradient fallback was used (`n > 16`).
    pub heuristic: bool,
}

/// Minimizes `xᵀMx` over the unit sphere intersected with the nonnegative orthant
/// for an orthogonal projector `M`.
///
/// Every local minimizer with support `Z` is a positive eigenvector of the
/// principal submatrix `M_ZZ`, so enumerating supports and their nonnegative
/// eigenvectors visits the global minimizer.
pub fn orthant_sphere_min(m: &DMatrix<f64>) -> Result<OrthantMin> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Shape(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = symmetric_defect(m).max((m * m - m).amax());
    if defect > 1e-10 {
        return Err(Error::NotAProjector { defect });
    }
    if n > MAX_EXACT_DIM {
        return Ok(projected_gradient(m));
    }
    Ok(enumerate_supports(m, -1.0))
}

/// Whether `min ‖Mx‖` over unit `x ≥ 0` exceeds `threshold`, for an orthogonal
/// projector `M`. Stops as soon as a point at or below the threshold is found.
pub fn orthant_gap_exceeds(m: &DMatrix<f64>, threshold: f64) -> Result<bool> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Shape(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let best = if n > MAX_EXACT_DIM {
        projected_gradient(m)
    } else {
        enumerate_supports(m, threshold)
    };
    Ok(best.value.sqrt() > threshold)
}

/// Exhaustive support enumeration; returns early once `‖Mx‖ ≤ stop`.
fn enumerate_supports(m: &DMatrix<f64>, stop: f64) -> OrthantMin {
    let n = m.nrows();
    let stop_sq = if stop < 0.0 { -1.0 } else { stop * stop };
    let mut best = OrthantMin {
        value: f64::INFINITY,
        argmin: DVector::zeros(n),
        heuristic: false,
    };
    let mut consider = |x: DVector<f64>| {
        let value = (m * &x).norm_squared();
        if value < best.value {
            best.value = value;
            best.argmin = x;
        }
        best.value <= stop_sq
    };

    for i in 0..n {
        let mut x = DVector::zeros(n);
        x[i] = 1.0;
        if consider(x) {
            return best;
        }
    }
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        idx.clear();
        idx.extend((0..n).filter(|i| mask & (1 << i) != 0));
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        let eig = SymmetricEigen::new(sub);
        for v in eig.eigenvectors.column_iter() {
            let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
            if v.iter().any(|&e| sign * e < -1e-12) {
                continue;
            }
            let mut x = DVector::zeros(n);
            for (k, &i) in idx.iter().enumerate() {
                x[i] = (sign * v[k]).max(0.0);
            }
            let norm = x.norm();
            if norm > 0.0 && consider(x / norm) {
                return best;
            }
        }
    }
    best
}

fn projected_gradient(m: &DMatrix<f64>) -> OrthantMin {
    let n = m.nrows();
    let mut best = OrthantMin {
        value: f64::INFINITY,
        argmin: DVector::zeros(n),
        heuristic: true,
    };
    for start in 0..HEURISTIC_STARTS {
        let mut x = rng::unit_vector(&mut rng::stream(0x5eed, start), n).abs();
        x /= x.norm();
        for _ in 0..500 {
            let g = m * &x;
            let mut next = (&x - 0.5 * g).map(|v| v.max(0.0));
            let norm = next.norm();
            if norm == 0.0 {
                break;
            }
            next /= norm;
            let moved = (&next - &x).amax();
            x = next;
            if moved < 1e-14 {
                break;
            }
        }
        let value = (m * &x).norm_squared();
        if value < best.value {
            best.value = value;
            best.argmin = x;
        }
    }
    best
}

/// Which side of `Σ_m` a subspace lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrassmannSide {
    /// `W⊥` meets the orthant (`A ∈ F_P`).
    Primal,
    /// `W` meets the orthant (`A ∈ F_D`).
    Dual,
    IllPosed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannDistance {
    pub distance: f64,
    pub side: GrassmannSide,
    /// `min ‖Π_W x‖` over unit `x ≥ 0` (zero on the primal side).
    pub row_space_gap: f64,
    /// `min ‖Π_{W⊥} x‖` over unit `x ≥ 0` (zero on the dual side).
    pub complement_gap: f64,
    pub row_space_argmin: DVector<f64>,
    pub complement_argmin: DVector<f64>,
}

pub fn grassmann_distance(w: &Subspace) -> Result<GrassmannDistance> {
    grassmann_distance_with(w, ILL_TOL)
}

pub fn grassmann_distance_with(w: &Subspace, ill_tol: f64) -> Result<GrassmannDistance> {
    if w.dim() >= w.ambient_dim() {
        return Err(Error::Degenerate);
    }
    let basis = w.basis();
    let row = orthant_sphere_min(&w.projector())?;
    let comp = orthant_sphere_min(&w.complement_projector())?;
    // Norms evaluated directly: the square root of a quadratic form near zero
    // would only be accurate to about 1e-8.
    let row_space_gap = (basis.transpose() * &row.argmin).norm();
    let complement_gap = (&comp.argmin - basis * (basis.transpose() * &comp.argmin)).norm();
    let distance = row_space_gap.max(complement_gap);
    let side = if distance <= ill_tol {
        GrassmannSide::IllPosed
    } else if complement_gap <= row_space_gap {
        GrassmannSide::Dual
    } else {
        GrassmannSide::Primal
    };
    Ok(GrassmannDistance {
        distance,
        side,
        row_space_gap,
        complement_gap,
        row_space_argmin: row.argmin,
        complement_argmin: comp.argmin,
    })
}
