//! Validated problem instances, subspaces and the dense kernels shared by every
//! other module.

mod io;
mod linalg;
mod subspace;

pub use io::{
    matrix_from_json_value, matrix_to_json_value, parse_csv, parse_json, read_matrix, write_matrix,
    MatrixFormat, MatrixJson,
};
pub use linalg::{
    column_norms, extreme_singular_values, qr_of_transpose, spectral_norm, symmetric_defect,
};
pub use subspace::{projection_distance, subspace_from_rows, Subspace};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative rank tolerance: `σ_min > RANK_TOL · σ_max`.
pub const RANK_TOL: f64 = 1e-10;

/// Absolute ill-posedness band on hull distances and Grassmann distances.
pub const ILL_TOL: f64 = 1e-9;

/// Numerical thresholds used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank: f64,
    pub ill: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: RANK_TOL,
            ill: ILL_TOL,
        }
    }
}

impl Tolerances {
    pub fn with_ill(ill: f64) -> Self {
        Tolerances {
            ill,
            ..Self::default()
        }
    }
}

/// A matrix `A ∈ ℝ^{m×n}` with `m ≤ n`, nonzero columns and full row rank.
///
/// Construction is the only place the invariants are checked; every accessor
/// afterwards can rely on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    a: DMatrix<f64>,
}

impl ProblemInstance {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        Self::with_rank_tolerance(a, RANK_TOL)
    }

    pub fn with_rank_tolerance(a: DMatrix<f64>, rank_tol: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Shape(format!("empty matrix ({m}x{n})")));
        }
        if m > n {
            return Err(Error::Shape(format!("m = {m} exceeds n = {n}")));
        }
        for j in 0..n {
            for i in 0..m {
                if !a[(i, j)].is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
            }
        }
        let (smax, smin) = extreme_singular_values(&a);
        if smax == 0.0 || smin <= rank_tol * smax {
            let ratio = if smax == 0.0 { 0.0 } else { smin / smax };
            return Err(Error::RankDeficient { ratio });
        }
        let norms = column_norms(&a);
        let largest = norms.max();
        for (j, &nj) in norms.iter().enumerate() {
            if nj == 0.0 || nj <= rank_tol * largest {
                return Err(Error::ZeroColumn(j + 1));
            }
        }
        Ok(ProblemInstance { a })
    }

    /// Builds an instance from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        validate_instance(&data, m, n)
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.a
    }

    pub fn column_norms(&self) -> DVector<f64> {
        column_norms(&self.a)
    }

    /// Operator norm for `‖·‖₁` on ℝⁿ and `‖·‖₂` on ℝᵐ, i.e. the largest column norm.
    pub fn norm_12(&self) -> f64 {
        self.column_norms().max()
    }

    /// Spectral norm `σ_max(A)`.
    pub fn norm_22(&self) -> f64 {
        spectral_norm(&self.a)
    }

    /// `max ‖a_i‖ / min ‖a_i‖`.
    pub fn column_ratio(&self) -> f64 {
        let norms = self.column_norms();
        norms.max() / norms.min()
    }

    /// `σ_max(A) / σ_min(A)`.
    pub fn sigma_ratio(&self) -> f64 {
        let (smax, smin) = extreme_singular_values(&self.a);
        smax / smin
    }

    pub fn qr_of_transpose(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        qr_of_transpose(&self.a)
    }

    pub fn row_space(&self) -> Subspace {
        subspace_from_rows(self)
    }

    /// Columns scaled to unit Euclidean length.
    pub fn normalized_columns(&self) -> DMatrix<f64> {
        let mut out = self.a.clone();
        for (mut col, nj) in out.column_iter_mut().zip(self.column_norms().iter()) {
            col /= *nj;
        }
        out
    }
}

/// Validates `m·n` row-major entries as a [`ProblemInstance`].
pub fn validate_instance(raw: &[f64], m: usize, n: usize) -> Result<ProblemInstance> {
    if raw.len() != m * n {
        return Err(Error::Shape(format!(
            "{} entries given for a {m}x{n} matrix",
            raw.len()
        )));
    }
    ProblemInstance::new(DMatrix::from_row_slice(m, n, raw))
}

/// Which of the two systems is strictly feasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeasibilityTag {
    /// `A ∈ F_P \ Σ`: the origin is interior to the hull of the normalized columns.
    PrimalStrict,
    /// `A ∈ F_D \ Σ`: the origin lies outside the hull.
    DualStrict,
    /// Both systems are feasible within the tolerance band.
    IllPosed,
}

impl FeasibilityTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeasibilityTag::PrimalStrict => "PrimalStrict",
            FeasibilityTag::DualStrict => "DualStrict",
            FeasibilityTag::IllPosed => "IllPosed",
        }
    }
}

/// Outcome of the Gordan alternative together with its certificate.
///
/// The witness is an `n`-vector `x ≥ 0` with `Ax ≈ 0` for `PrimalStrict`, an
/// `m`-vector `y` with `Aᵀy > 0` for `DualStrict`, and a supporting-hyperplane
/// normal `y` with `Aᵀy ≳ 0` for `IllPosed`. `margin` is the hull-boundary
/// distance of the normalized columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityStatus {
    pub tag: FeasibilityTag,
    pub witness: DVector<f64>,
    pub margin: f64,
}

impl FeasibilityStatus {
    pub fn is_ill_posed(&self) -> bool {
        self.tag == FeasibilityTag::IllPosed
    }
}
