//! Seeded random streams and the small random-matrix ensembles used by the
//! oracles, sweeps and tests.
//!
//! Every stochastic routine derives its generator from `(seed, index)` so results
//! do not depend on scheduling or thread count.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// Independent stream `index` of the generator family keyed by `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(&mut *rng);
        z
    })
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            let z: f64 = StandardNormal.sample(&mut *rng);
            z
        });
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, dim, dim).qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..dim {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

/// `U·diag(s)·Vᵀ` with singular values log-uniform in `[1, max_cond]`, both ends attained.
pub fn random_nonsingular<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_cond: f64) -> DMatrix<f64> {
    let u = random_orthogonal(rng, dim);
    let v = random_orthogonal(rng, dim);
    let mut s = DVector::from_fn(dim, |_, _| max_cond.powf(rng.random::<f64>()));
    s[0] = 1.0;
    if dim > 1 {
        s[dim - 1] = max_cond;
    }
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// Positive diagonal entries log-uniform in `[1/spread, spread]`.
pub fn random_positive_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    spread: f64,
) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| spread.powf(2.0 * rng.random::<f64>() - 1.0))
}
