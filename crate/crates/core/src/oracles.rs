//! Brute-force cross-checks for the exact condition computations.
//!
//! Every oracle here is an upper-bound searcher: each candidate it accepts is a
//! feasible point of the minimization it shadows, so the returned value can
//! only overestimate the true minimum.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::condition::{
    classify_matrix, extended, grassmann_distance_with, orthant_gap_exceeds, GrassmannSide,
};
use crate::error::{Error, Result};
use crate::model::{
    column_norms, matrix_to_json_value, projection_distance, spectral_norm, FeasibilityTag,
    ProblemInstance, Subspace, ILL_TOL,
};
use crate::rng::{gaussian_matrix, stream, unit_vector, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    UpperBound,
    Estimate,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::UpperBound => "UpperBound",
            BoundKind::Estimate => "Estimate",
        }
    }
}

/// The object achieving an oracle's value.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Unit vector `y` of the sampled min-max.
    Direction(DVector<f64>),
    /// Perturbed matrix `A + ΔA` on the ill-posed boundary.
    Matrix(DMatrix<f64>),
    /// Orthonormal basis (columns) of a boundary subspace.
    Basis(DMatrix<f64>),
}

impl Witness {
    fn to_json(&self) -> Value {
        match self {
            Witness::Direction(y) => json!(y.iter().copied().collect::<Vec<f64>>()),
            Witness::Matrix(a) | Witness::Basis(a) => matrix_to_json_value(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub bound_kind: BoundKind,
    pub evaluations: u64,
    pub best_witness: Witness,
    pub seed: u64,
}

impl OracleResult {
    pub fn to_json(&self) -> Value {
        json!({
            "value": extended(self.value),
            "bound_kind": self.bound_kind.as_str(),
            "evaluations": self.evaluations,
            "seed": self.seed,
            "witness": self.best_witness.to_json(),
        })
    }
}

// ---------------------------------------------------------------------------
// Sphere sampling of min_{‖y‖=1} max_i ‖a_i‖ / a_iᵀy

const REFINE_SIDE: usize = 10;
const REFINE_SHRINK: f64 = 3.0;
const REFINE_FLOOR: f64 = 1e-13;

type Best = Option<(f64, DVector<f64>)>;

/// Upper bound on `C_GCC(A)` by evaluating the min-max over sphere grids.
///
/// The run at `resolution` is the union of self-contained levels of sizes
/// `resolution, resolution/2, …, 1`: a quasi-uniform grid whose best point is
/// refined by shrinking local grids in its tangent plane. Doubling the resolution
/// only adds a level, so the returned value never increases. Only strictly
/// feasible `y` (all `a_iᵀy > 0`) are ever evaluated.
pub fn gcc_sampling(a: &ProblemInstance, resolution: usize) -> Result<OracleResult> {
    let m = a.m();
    if !(2..=3).contains(&m) {
        return Err(Error::Unsupported(format!(
            "sphere sampling needs m in {{2, 3}}, got {m}"
        )));
    }
    if resolution == 0 {
        return Err(Error::Unsupported("resolution must be positive".into()));
    }
    let unit = a.normalized_columns();
    let mut evaluations = 0u64;
    let mut best: Best = None;
    let mut size = resolution;
    while size > 0 {
        if let Some((v, y)) = sampling_level(&unit, size, &mut evaluations) {
            // Strict comparison keeps the result independent of level order on ties.
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, y));
            }
        }
        size /= 2;
    }
    let (value, y) = best.ok_or(Error::NoFeasibleDirection)?;
    Ok(OracleResult {
        value,
        bound_kind: BoundKind::UpperBound,
        evaluations,
        best_witness: Witness::Direction(y),
        seed: 0,
    })
}

/// One grid of `size` points followed by local refinement of its best point.
fn sampling_level(unit: &DMatrix<f64>, size: usize, evaluations: &mut u64) -> Best {
    let m = unit.nrows();
    let mut best: Best = None;
    let mut consider = |y: DVector<f64>, best: &mut Best| {
        *evaluations += 1;
        let h = (unit.transpose() * &y).min();
        if h > 0.0 && best.as_ref().is_none_or(|(b, _)| 1.0 / h < *b) {
            *best = Some((1.0 / h, y));
        }
    };

    for k in 0..size {
        let y = if m == 2 {
            circle_point(k, size)
        } else {
            fibonacci_point(k, size)
        };
        consider(y, &mut best);
    }
    let mut centre = best.as_ref()?.1.clone();

    // (2k+1)^(m-1) grid in the tangent plane, recentred on the best point and
    // shrunk each round.
    let spacing = if m == 2 {
        2.0 * PI / size as f64
    } else {
        (4.0 * PI / size as f64).sqrt()
    };
    let mut radius = (3.0 * spacing).min(1.0);
    while radius > REFINE_FLOOR {
        let tangent = tangent_basis(&centre);
        let side = REFINE_SIDE as i64;
        let step = radius / REFINE_SIDE as f64;
        for i in -side..=side {
            let inner = if m == 2 { 0..=0 } else { -side..=side };
            for j in inner {
                let mut y = centre.clone() + tangent.column(0) * (i as f64 * step);
                if m == 3 {
                    y += tangent.column(1) * (j as f64 * step);
                }
                consider(y.normalize(), &mut best);
            }
        }
        centre = best
            .as_ref()
            .expect("refinement keeps a feasible best")
            .1
            .clone();
        radius /= REFINE_SHRINK;
    }
    best
}

fn circle_point(k: usize, size: usize) -> DVector<f64> {
    let phi = 2.0 * PI * k as f64 / size as f64;
    DVector::from_vec(vec![phi.cos(), phi.sin()])
}

fn fibonacci_point(k: usize, size: usize) -> DVector<f64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let z = 1.0 - (2.0 * k as f64 + 1.0) / size as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * k as f64;
    DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
}

/// Orthonormal basis of `y⊥` (columns).
fn tangent_basis(y: &DVector<f64>) -> DMatrix<f64> {
    let dim = y.len();
    let mut out = DMatrix::zeros(dim, dim - 1);
    let mut filled = 0;
    for axis in 0..dim {
        if filled == dim - 1 {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[axis] = 1.0;
        v -= y * y[axis];
        for c in 0..filled {
            let col = out.column(c).clone_owned();
            v -= &col * col.dot(&v);
        }
        let norm = v.norm();
        if norm > 1e-8 {
            out.set_column(filled, &(v / norm));
            filled += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Ray search shared by the two perturbation oracles

/// Length of the local search per restart.
#[derive(Clone, Copy)]
struct Schedule {
    iterations: usize,
    sigma_min: f64,
}

/// Classifying a matrix is cheap; polish hard.
const RENEGAR_SCHEDULE: Schedule = Schedule {
    iterations: 400,
    sigma_min: 1e-5,
};
/// Each subspace classification enumerates orthant supports.
const GRASSMANN_SCHEDULE: Schedule = Schedule {
    iterations: 80,
    sigma_min: 1e-3,
};
const ES_SIGMA0: f64 = 0.3;
/// Relative bracket width while the search is running.
const COARSE_WIDTH: f64 = 1e-3;
/// Relative bracket width of the reported crossing.
const BISECTION_WIDTH: f64 = 1e-12;
const DOUBLINGS: usize = 60;

struct RayHit<D> {
    t: f64,
    direction: D,
}

/// Smallest `t` in a doubling scan with `flipped(d, t)`, refined by bisection.
fn first_flip<D>(
    direction: &D,
    t_start: f64,
    t_max: f64,
    flipped: &impl Fn(&D, f64) -> bool,
    evaluations: &mut u64,
) -> Option<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = t_start;
    for _ in 0..DOUBLINGS {
        *evaluations += 1;
        if flipped(direction, hi) {
            return Some(bisect(
                direction,
                lo,
                hi,
                COARSE_WIDTH,
                flipped,
                evaluations,
            ));
        }
        if hi >= t_max {
            return None;
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
    }
    None
}

/// Shrinks `[lo, hi]` (unflipped at `lo`, flipped at `hi`) to relative `width`.
fn bisect<D>(
    direction: &D,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    flipped: &impl Fn(&D, f64) -> bool,
    evaluations: &mut u64,
) -> (f64, f64) {
    while hi - lo > width * hi {
        let mid = 0.5 * (lo + hi);
        *evaluations += 1;
        if flipped(direction, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// One restart: a (1+1) evolution strategy over ray directions.
///
/// A mutated direction is only bisected when it is already flipped at the
/// incumbent distance, so each rejection costs a single classification. The
/// incumbent bracket is kept coarse and only refined once at the end.
fn ray_restart<D: Clone>(
    rng: &mut StreamRng,
    schedule: Schedule,
    initial: impl Fn(&mut StreamRng) -> D,
    mutate: impl Fn(&mut StreamRng, &D, f64) -> D,
    flipped: impl Fn(&D, f64) -> bool,
    t_start: f64,
    t_max: f64,
) -> (Option<RayHit<D>>, u64) {
    let mut evaluations = 0;
    let mut best: Option<((f64, f64), D)> = None;
    // A few fresh draws until one ray reaches the boundary.
    for _ in 0..8 {
        let d = initial(rng);
        if let Some(bracket) = first_flip(&d, t_start, t_max, &flipped, &mut evaluations) {
            best = Some((bracket, d));
            break;
        }
    }
    let Some(((mut t_lo, mut t_best), mut d_best)) = best else {
        return (None, evaluations);
    };

    let mut sigma = ES_SIGMA0;
    for _ in 0..schedule.iterations {
        if sigma < schedule.sigma_min {
            break;
        }
        let candidate = mutate(rng, &d_best, sigma);
        evaluations += 1;
        if flipped(&candidate, t_best) {
            (t_lo, t_best) = bisect(
                &candidate,
                0.0,
                t_best,
                COARSE_WIDTH,
                &flipped,
                &mut evaluations,
            );
            d_best = candidate;
            sigma *= 1.5;
        } else {
            sigma *= 0.85;
        }
    }
    let (_, t_best) = bisect(
        &d_best,
        t_lo,
        t_best,
        BISECTION_WIDTH,
        &flipped,
        &mut evaluations,
    );
    (
        Some(RayHit {
            t: t_best,
            direction: d_best,
        }),
        evaluations,
    )
}

/// Runs `budget` restarts in parallel and keeps the best (lowest index on ties).
fn best_of_restarts<D: Clone + Send>(
    budget: usize,
    seed: u64,
    restart: impl Fn(&mut StreamRng) -> (Option<RayHit<D>>, u64) + Sync,
) -> (Option<RayHit<D>>, u64) {
    let runs: Vec<(Option<RayHit<D>>, u64)> = (0..budget)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            restart(&mut rng)
        })
        .collect();
    let evaluations: u64 = runs.iter().map(|(_, e)| e).sum();
    let best = runs
        .into_iter()
        .filter_map(|(hit, _)| hit)
        .reduce(|a, b| if b.t < a.t { b } else { a });
    (best, evaluations)
}

// ---------------------------------------------------------------------------
// Renegar distance to the ill-posed set

/// Operator norm `‖·‖_{p,2}` in which a matrix perturbation is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormPair {
    /// `‖A‖_{1,2}`: the largest column norm.
    OneTwo,
    /// `‖A‖_{2,2}`: the spectral norm.
    TwoTwo,
}

impl NormPair {
    pub fn norm(&self, a: &DMatrix<f64>) -> f64 {
        match self {
            NormPair::OneTwo => column_norms(a).max(),
            NormPair::TwoTwo => spectral_norm(a),
        }
    }
}

impl FromStr for NormPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "12" | "1,2" | "onetwo" | "one-two" => Ok(NormPair::OneTwo),
            "22" | "2,2" | "twotwo" | "two-two" => Ok(NormPair::TwoTwo),
            other => Err(Error::Parse(format!("unknown norm pair `{other}`"))),
        }
    }
}

fn opposite(tag: FeasibilityTag) -> FeasibilityTag {
    match tag {
        FeasibilityTag::PrimalStrict => FeasibilityTag::DualStrict,
        FeasibilityTag::DualStrict => FeasibilityTag::PrimalStrict,
        FeasibilityTag::IllPosed => FeasibilityTag::IllPosed,
    }
}

/// Upper bound on `min{‖ΔA‖ : A + ΔA ill-posed}` in the requested norm.
///
/// Each restart searches over perturbation directions `Δ` of unit norm and
/// bisects along `A + tΔ` to the first point classified on the opposite strict
/// side, so every accepted `t` lies beyond a crossing of the ill-posed set.
/// `budget` is the number of restarts.
pub fn renegar_perturbation_search(
    a: &ProblemInstance,
    norm: NormPair,
    budget: usize,
    seed: u64,
) -> Result<OracleResult> {
    let base = a.matrix().clone();
    let start_tag = classify_matrix(&base, ILL_TOL);
    if start_tag == FeasibilityTag::IllPosed {
        return Ok(OracleResult {
            value: 0.0,
            bound_kind: BoundKind::UpperBound,
            evaluations: 1,
            best_witness: Witness::Matrix(base),
            seed,
        });
    }
    let target = opposite(start_tag);
    let (m, n) = base.shape();
    let scale = norm.norm(&base);

    let unit = |d: DMatrix<f64>| {
        let s = norm.norm(&d);
        d / s
    };
    // Shifting every column by the same vector is the extremal move for
    // equal-norm columns, so it is seeded alongside generic directions.
    let initial = |rng: &mut StreamRng| -> DMatrix<f64> {
        let d = match rng.random_range(0..3) {
            0 => gaussian_matrix(rng, m, n),
            1 => unit_vector(rng, m) * unit_vector(rng, n).transpose(),
            _ => unit_vector(rng, m) * DVector::from_element(n, 1.0).transpose(),
        };
        unit(d)
    };
    let mutate = |rng: &mut StreamRng, d: &DMatrix<f64>, sigma: f64| -> DMatrix<f64> {
        let g = gaussian_matrix(rng, m, n);
        let g = &g / g.norm();
        unit(d + g * sigma)
    };
    let flipped = |d: &DMatrix<f64>, t: f64| classify_matrix(&(&base + d * t), ILL_TOL) == target;

    let (hit, evaluations) = best_of_restarts(budget, seed, |rng| {
        ray_restart(
            rng,
            RENEGAR_SCHEDULE,
            initial,
            mutate,
            flipped,
            1e-3 * scale,
            16.0 * scale,
        )
    });
    let hit = hit.ok_or(Error::BudgetExhausted)?;
    Ok(OracleResult {
        value: hit.t,
        bound_kind: BoundKind::UpperBound,
        evaluations,
        best_witness: Witness::Matrix(&base + &hit.direction * hit.t),
        seed,
    })
}

// ---------------------------------------------------------------------------
// Grassmann distance to the ill-posed subspaces

fn side_of(w: &Subspace) -> Option<GrassmannSide> {
    grassmann_distance_with(w, ILL_TOL).ok().map(|d| d.side)
}

fn tilted(q: &DMatrix<f64>, g: &DMatrix<f64>, t: f64) -> Option<Subspace> {
    Subspace::from_spanning_columns(&(q + g * t)).ok()
}

/// Upper bound on `d(W, Σ_m)` by searching along geodesics of the Grassmannian.
///
/// Candidates are `W' = span(Q + tG)` with `G ⊥ W` of spectral norm one, for
/// which `d(W, W') = t/√(1+t²)`. A candidate is accepted once its own orthant
/// minima put it strictly on the other side.
pub fn grassmann_perturbation_search(
    w: &Subspace,
    budget: usize,
    seed: u64,
) -> Result<OracleResult> {
    let (n, m) = (w.ambient_dim(), w.dim());
    if m == 0 || m >= n {
        return Err(Error::Degenerate);
    }
    let q = w.basis().clone();
    let start = side_of(w).ok_or(Error::Degenerate)?;
    if start == GrassmannSide::IllPosed {
        return Ok(OracleResult {
            value: 0.0,
            bound_kind: BoundKind::UpperBound,
            evaluations: 1,
            best_witness: Witness::Basis(q),
            seed,
        });
    }
    let target = match start {
        GrassmannSide::Primal => GrassmannSide::Dual,
        _ => GrassmannSide::Primal,
    };
    let complement = DMatrix::identity(n, n) - &q * q.transpose();

    let horizontal = |g: DMatrix<f64>| -> DMatrix<f64> {
        let h = &complement * g;
        let s = spectral_norm(&h);
        h / s
    };
    let initial = |rng: &mut StreamRng| -> DMatrix<f64> {
        let g = if rng.random::<bool>() {
            gaussian_matrix(rng, n, m)
        } else {
            unit_vector(rng, n) * unit_vector(rng, m).transpose()
        };
        horizontal(g)
    };
    let mutate = |rng: &mut StreamRng, g: &DMatrix<f64>, sigma: f64| -> DMatrix<f64> {
        let noise = gaussian_matrix(rng, n, m);
        let noise = &noise / noise.norm();
        horizontal(g + noise * sigma)
    };
    // By Gordan's alternative, one orthant gap above the band already places
    // `W'` strictly on the side where the other gap vanishes.
    let flipped = |g: &DMatrix<f64>, t: f64| {
        tilted(&q, g, t).is_some_and(|wp| {
            let projector = match target {
                GrassmannSide::Primal => wp.complement_projector(),
                _ => wp.projector(),
            };
            orthant_gap_exceeds(&projector, ILL_TOL).unwrap_or(false)
        })
    };

    // t = 1e6 already corresponds to d ≈ 1 - 5e-13.
    let (hit, evaluations) = best_of_restarts(budget, seed, |rng| {
        ray_restart(rng, GRASSMANN_SCHEDULE, initial, mutate, flipped, 1e-3, 1e6)
    });
    let hit = hit.ok_or(Error::BudgetExhausted)?;
    let wp = tilted(&q, &hit.direction, hit.t).ok_or(Error::Degenerate)?;
    let value = projection_distance(w, &wp)?;
    Ok(OracleResult {
        value,
        bound_kind: BoundKind::UpperBound,
        evaluations,
        best_witness: Witness::Basis(wp.basis().clone()),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::{gcc, grassmann_distance};
    use crate::precondition::{precondition, Order};
    use approx::assert_relative_eq;

    fn inst(rows: &[Vec<f64>]) -> ProblemInstance {
        ProblemInstance::from_rows(rows).unwrap()
    }

    #[test]
    fn sampling_identity() {
        let r = gcc_sampling(&inst(&[vec![1.0, 0.0], vec![0.0, 1.0]]), 1000).unwrap();
        assert!(r.value >= 2f64.sqrt() - 1e-15);
        assert!(r.value <= 2f64.sqrt() * (1.0 + 1e-3));
    }

    #[test]
    fn sampling_example1_from_above() {
        let a = inst(&[vec![20.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]]);
        let r = gcc_sampling(&a, 1_000_000).unwrap();
        assert!(r.value >= 2f64.sqrt() * (1.0 - 1e-14));
        assert!(r.value <= 2f64.sqrt() * (1.0 + 1e-3));
    }

    #[test]
    fn sampling_rejects_unsupported_and_infeasible() {
        let a = inst(&[
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0, -1.0],
        ]);
        assert!(matches!(gcc_sampling(&a, 100), Err(Error::Unsupported(_))));
        let primal = inst(&[vec![1.0, -1.0, 0.0], vec![0.0, 0.1, -1.0]]);
        assert_eq!(
            gcc_sampling(&primal, 1000).unwrap_err(),
            Error::NoFeasibleDirection
        );
    }

    #[test]
    fn sampling_three_rows() {
        let a = inst(&[
            vec![1.0, 0.0, 0.0, 0.3],
            vec![0.0, 1.0, 0.0, 0.2],
            vec![0.0, 0.0, 1.0, 0.9],
        ]);
        let exact = gcc(&a).unwrap();
        let r = gcc_sampling(&a, 20_000).unwrap();
        assert!(r.value >= exact * (1.0 - 1e-12));
        assert_relative_eq!(r.value, exact, max_relative = 1e-6);
    }

    #[test]
    fn renegar_ill_posed_is_zero() {
        let a = inst(&[vec![1.0, -1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let r = renegar_perturbation_search(&a, NormPair::TwoTwo, 2, 1).unwrap();
        assert!(r.value <= 1e-9);
    }

    #[test]
    fn renegar_unit_columns_example1() {
        let a = inst(&[vec![20.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]]);
        let unit = precondition(&a, Order::NormalizeOnly).unwrap().a_hat;
        let r = renegar_perturbation_search(&unit, NormPair::OneTwo, 8, 7).unwrap();
        let target = 1.0 / 2f64.sqrt();
        assert!(r.value >= target * (1.0 - 1e-9), "{}", r.value);
        assert!(r.value <= target * 1.05, "{}", r.value);
        let Witness::Matrix(w) = &r.best_witness else {
            panic!()
        };
        assert_eq!(classify_matrix(w, 10.0 * ILL_TOL), FeasibilityTag::IllPosed);
    }

    #[test]
    fn grassmann_search_diagonal_line() {
        let w = Subspace::from_spanning_columns(&DMatrix::from_column_slice(2, 1, &[1.0, 1.0]))
            .unwrap();
        let r = grassmann_perturbation_search(&w, 4, 3).unwrap();
        let exact = grassmann_distance(&w).unwrap().distance;
        assert_relative_eq!(exact, 1.0 / 2f64.sqrt(), max_relative = 1e-12);
        assert!(r.value >= exact - 1e-9 && r.value <= exact * 1.05);
    }

    #[test]
    fn restarts_are_reproducible() {
        let w = inst(&[vec![-0.1, -1.0, 1.0], vec![0.0, -1.0, 1.1]]).row_space();
        let a = grassmann_perturbation_search(&w, 6, 11).unwrap();
        let b = grassmann_perturbation_search(&w, 6, 11).unwrap();
        assert_eq!(a, b);
        let more = grassmann_perturbation_search(&w, 12, 11).unwrap();
        assert!(more.value <= a.value);
    }

    #[test]
    fn json_shape() {
        let r = gcc_sampling(&inst(&[vec![1.0, 0.0], vec![0.0, 1.0]]), 100).unwrap();
        let v = r.to_json();
        assert_eq!(v["bound_kind"], "UpperBound");
        assert_eq!(v["witness"].as_array().unwrap().len(), 2);
    }
}
