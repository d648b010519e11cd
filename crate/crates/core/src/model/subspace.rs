use nalgebra::DMatrix;

use super::{extreme_singular_values, qr_of_transpose, ProblemInstance};
use crate::error::{Error, Result};

/// An `m`-dimensional subspace of ℝⁿ stored by an orthonormal basis (`n×m`).
///
/// Projectors are built on demand; distances are computed from the bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Orthonormalizes the columns of `spanning` (which must be linearly independent).
    pub fn from_spanning_columns(spanning: &DMatrix<f64>) -> Result<Self> {
        let (q, _) = qr_of_transpose(&spanning.transpose())?;
        Ok(Subspace { basis: q })
    }

    /// Wraps a basis that is already orthonormal to within `1e-12`.
    pub fn from_orthonormal_basis(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        if k == 0 || k > basis.nrows() {
            return Err(Error::Shape(format!(
                "basis of {k} vectors in dimension {}",
                basis.nrows()
            )));
        }
        let defect = (basis.transpose() * &basis - DMatrix::identity(k, k)).amax();
        if defect > 1e-12 {
            return Err(Error::Shape(format!(
                "basis is not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Subspace { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `Π_W = B·Bᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `Π_{W⊥} = I − B·Bᵀ`.
    pub fn complement_projector(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        DMatrix::identity(n, n) - self.projector()
    }

    pub fn distance(&self, other: &Subspace) -> Result<f64> {
        projection_distance(self, other)
    }
}

/// `W = span(Aᵀ)`, with the `Q` factor of `Aᵀ = QR` as basis.
pub fn subspace_from_rows(a: &ProblemInstance) -> Subspace {
    let (q, _) = a
        .qr_of_transpose()
        .expect("validated instances have full row rank");
    Subspace { basis: q }
}

/// `d(W₁, W₂) = σ_max(Π_{W₁} − Π_{W₂})`, the sine of the largest principal angle.
///
/// Evaluated as `σ_max((I − Π_{W₁})·B₂)`, which equals the projector form for
/// subspaces of equal dimension and keeps small angles accurate.
pub fn projection_distance(w1: &Subspace, w2: &Subspace) -> Result<f64> {
    if w1.ambient_dim() != w2.ambient_dim() || w1.dim() != w2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Gr({}, {}) vs Gr({}, {})",
            w1.ambient_dim(),
            w1.dim(),
            w2.ambient_dim(),
            w2.dim()
        )));
    }
    let b1 = w1.basis();
    let b2 = w2.basis();
    let residual = b2 - b1 * (b1.transpose() * b2);
    let (smax, _) = extreme_singular_values(&residual);
    Ok(smax.clamp(0.0, 1.0))
}
