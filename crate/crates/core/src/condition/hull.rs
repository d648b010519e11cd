//! Convex-hull geometry of a finite point set: nearest point to the origin
//! (Wolfe's algorithm) and the distance from the origin to the hull boundary.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest number of candidate facets (`C(k, m)`) the boundary search will enumerate.
pub const MAX_FACET_SUBSETS: usize = 924;

const WOLFE_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-13;
const FACET_TOL: f64 = 1e-12;

/// Nearest point of `conv{p_1, …, p_k}` to the origin with certifying weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    pub point: DVector<f64>,
    /// Convex coefficients, one per input point.
    pub weights: DVector<f64>,
}

impl MinNormPoint {
    pub fn norm(&self) -> f64 {
        self.point.norm()
    }
}

/// Wolfe's min-norm-point algorithm over the columns of `points`.
///
/// On return `zᵀp ≥ ‖z‖² − 1e-12·max‖p‖²` for every column `p`.
pub fn min_norm_point(points: &DMatrix<f64>) -> MinNormPoint {
    let (dim, k) = points.shape();
    assert!(k >= 1, "min_norm_point needs at least one point");
    let scale = points
        .column_iter()
        .map(|c| c.norm_squared())
        .fold(f64::MIN_POSITIVE, f64::max);

    let start = (0..k)
        .min_by(|&i, &j| {
            points
                .column(i)
                .norm_squared()
                .total_cmp(&points.column(j).norm_squared())
        })
        .unwrap();
    let mut support = vec![start];
    let mut lambda = vec![1.0];
    let mut x: DVector<f64> = points.column(start).into();

    for _major in 0..(20 * k + 100) {
        let xx = x.norm_squared();
        if xx <= 1e-30 * scale {
            break;
        }
        let dots = points.transpose() * &x;
        let (entering, lowest) = dots.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc },
        );
        if xx - lowest <= WOLFE_TOL * scale || support.contains(&entering) {
            break;
        }
        support.push(entering);
        lambda.push(0.0);

        for _minor in 0..(dim + 2) * 4 {
            let alpha = affine_minimizer(points, &support);
            if alpha.iter().all(|&a| a > WEIGHT_TOL) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut leaving = None;
            for (i, (&a, &l)) in alpha.iter().zip(&lambda).enumerate() {
                if a <= WEIGHT_TOL && l - a > 0.0 {
                    let t = l / (l - a);
                    if leaving.is_none() || t < theta {
                        theta = t.min(1.0);
                        leaving = Some(i);
                    }
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = (1.0 - theta) * *l + theta * a;
            }
            if let Some(i) = leaving {
                lambda[i] = 0.0;
            }
            let mut i = 0;
            while i < support.len() {
                if lambda[i] <= WEIGHT_TOL && support.len() > 1 {
                    support.remove(i);
                    lambda.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
        x = combine(points, &support, &lambda);
    }

    let mut weights = DVector::zeros(k);
    for (&j, &l) in support.iter().zip(&lambda) {
        weights[j] = l;
    }
    MinNormPoint {
        point: combine(points, &support, &lambda),
        weights,
    }
}

fn combine(points: &DMatrix<f64>, support: &[usize], lambda: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points.nrows());
    for (&j, &l) in support.iter().zip(lambda) {
        x.axpy(l, &points.column(j), 1.0);
    }
    x
}

/// Affine coefficients (summing to one) of the point of `aff{p_j : j ∈ support}`
/// nearest the origin, solved as least squares in difference coordinates.
fn affine_minimizer(points: &DMatrix<f64>, support: &[usize]) -> Vec<f64> {
    if support.len() == 1 {
        return vec![1.0];
    }
    let p0 = points.column(support[0]);
    let diffs = DMatrix::from_fn(points.nrows(), support.len() - 1, |r, c| {
        points[(r, support[c + 1])] - p0[r]
    });
    let svd = diffs.svd(true, true);
    let cutoff = 1e-13 * svd.singular_values.max();
    let t = svd
        .solve(&(-p0.clone_owned()), cutoff)
        .expect("U and V were computed");
    let mut alpha = Vec::with_capacity(support.len());
    alpha.push(1.0 - t.sum());
    alpha.extend(t.iter().copied());
    alpha
}

/// Where the origin sits relative to the hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullSide {
    Outside,
    Boundary,
    Inside,
}

/// Supporting hyperplane `{x : normalᵀx = offset}` with every point satisfying
/// `normalᵀp ≤ offset`; `normal` is a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    pub distance: f64,
    pub side: HullSide,
    pub nearest: MinNormPoint,
    /// The facet of smallest offset, computed whenever the origin is not clearly outside.
    pub facet: Option<Facet>,
}

/// Distance from the origin to the boundary of `conv{points}` for unit-norm columns.
///
/// Outside the hull this is the min-norm distance; inside it is the smallest
/// facet offset; within `ill_tol` of the boundary the side is `Boundary`.
pub fn hull_boundary_distance(points: &DMatrix<f64>, ill_tol: f64) -> Result<HullDistance> {
    if let Some(j) = points
        .column_iter()
        .position(|c| (c.norm() - 1.0).abs() > 1e-12)
    {
        return Err(Error::Shape(format!("point {j} is not a unit vector")));
    }
    let nearest = min_norm_point(points);
    let z = nearest.norm();
    if z > ill_tol {
        return Ok(HullDistance {
            distance: z,
            side: HullSide::Outside,
            nearest,
            facet: None,
        });
    }
    if affine_rank(points) < points.nrows() {
        return Err(Error::DegenerateHull);
    }
    let facet = nearest_facet(points)?.ok_or(Error::DegenerateHull)?;
    let (distance, side) = if facet.offset > ill_tol {
        (facet.offset, HullSide::Inside)
    } else {
        (z.max(facet.offset.max(0.0)), HullSide::Boundary)
    };
    Ok(HullDistance {
        distance,
        side,
        nearest,
        facet: Some(facet),
    })
}

fn affine_rank(points: &DMatrix<f64>) -> usize {
    let k = points.ncols();
    if k <= 1 {
        return 0;
    }
    let p0 = points.column(0);
    let diffs = DMatrix::from_fn(points.nrows(), k - 1, |r, c| points[(r, c + 1)] - p0[r]);
    let sv = diffs.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-10 * top.max(1e-300)).count()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Enumerates hyperplanes through every affinely independent `m`-subset of the
/// points and keeps the supporting one with the smallest offset.
pub fn nearest_facet(points: &DMatrix<f64>) -> Result<Option<Facet>> {
    let (m, k) = points.shape();
    if binomial(k, m) > MAX_FACET_SUBSETS {
        return Err(Error::Unsupported(format!(
            "facet enumeration over C({k}, {m}) subsets"
        )));
    }
    let mut best: Option<Facet> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    if m > k {
        return Ok(None);
    }
    loop {
        if let Some(facet) = facet_through(points, &subset) {
            if best.as_ref().is_none_or(|b| facet.offset < b.offset) {
                best = Some(facet);
            }
        }
        if !next_combination(&mut subset, k) {
            break;
        }
    }
    Ok(best)
}

fn next_combination(subset: &mut [usize], k: usize) -> bool {
    let m = subset.len();
    let mut i = m;
    while i > 0 {
        i -= 1;
        if subset[i] < k - m + i {
            subset[i] += 1;
            for j in i + 1..m {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn facet_through(points: &DMatrix<f64>, subset: &[usize]) -> Option<Facet> {
    let m = points.nrows();
    let p0 = points.column(subset[0]);
    // Rows p_i − p_0; the hyperplane normal spans their null space and is given by
    // signed maximal minors.
    let diffs = DMatrix::from_fn(m - 1, m, |r, c| points[(c, subset[r + 1])] - p0[c]);
    let mut normal = DVector::zeros(m);
    for c in 0..m {
        let minor = diffs.clone().remove_column(c);
        let det = if m == 1 { 1.0 } else { minor.determinant() };
        normal[c] = if c % 2 == 0 { det } else { -det };
    }
    let size: f64 = diffs.row_iter().map(|r| r.norm()).product();
    let norm = normal.norm();
    if !(norm > 1e-10 * size.max(f64::MIN_POSITIVE)) {
        return None;
    }
    normal /= norm;
    let offset = normal.dot(&p0);
    let heights = points.transpose() * &normal;
    let above = heights
        .iter()
        .map(|h| h - offset)
        .fold(f64::NEG_INFINITY, f64::max);
    let below = heights
        .iter()
        .map(|h| h - offset)
        .fold(f64::INFINITY, f64::min);
    let vertices = subset.to_vec();
    if above <= FACET_TOL {
        Some(Facet {
            normal,
            offset,
            vertices,
        })
    } else if below >= -FACET_TOL {
        Some(Facet {
            normal: -normal,
            offset: -offset,
            vertices,
        })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cols(dim: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(dim, data.len() / dim, data)
    }

    fn certificate_holds(points: &DMatrix<f64>, mnp: &MinNormPoint) -> bool {
        let zz = mnp.point.norm_squared();
        points
            .column_iter()
            .all(|p| mnp.point.dot(&p) >= zz - 1e-12)
    }

    #[test]
    fn two_axes() {
        let pts = cols(2, &[1.0, 0.0, 0.0, 1.0]);
        let mnp = min_norm_point(&pts);
        assert_relative_eq!(
            mnp.point,
            DVector::from_vec(vec![0.5, 0.5]),
            epsilon = 1e-15
        );
        assert_relative_eq!(mnp.norm(), 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(certificate_holds(&pts, &mnp));
    }

    #[test]
    fn origin_among_points() {
        let pts = cols(2, &[1.0, 2.0, 0.0, 0.0, -3.0, 1.0]);
        assert_eq!(min_norm_point(&pts).norm(), 0.0);
    }

    #[test]
    fn segment_with_outside_minimizer() {
        // On p(t) = (2,0) + t(1,1), ‖p(t)‖² = (2+t)² + t² is increasing on [0, 1];
        // sampling t on a grid of 10⁴ confirms the minimizer is t = 0.
        let best = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .min_by(|a, b| ((2.0 + a).powi(2) + a * a).total_cmp(&((2.0 + b).powi(2) + b * b)))
            .unwrap();
        assert_eq!(best, 0.0);
        let mnp = min_norm_point(&cols(2, &[2.0, 0.0, 3.0, 1.0]));
        assert_relative_eq!(
            mnp.point,
            DVector::from_vec(vec![2.0, 0.0]),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            mnp.weights,
            DVector::from_vec(vec![1.0, 0.0]),
            epsilon = 1e-15
        );
    }

    #[test]
    fn origin_inside_simplex_gives_zero_with_weights() {
        let pts = cols(2, &[1.0, 0.0, -0.5, 0.8, -0.5, -0.8, 0.3, 0.3]);
        let mnp = min_norm_point(&pts);
        assert!(mnp.norm() < 1e-14);
        assert!(mnp.weights.iter().all(|&w| w >= 0.0));
        assert_relative_eq!(mnp.weights.sum(), 1.0, epsilon = 1e-14);
        assert!((&pts * &mnp.weights).norm() < 1e-14);
    }

    #[test]
    fn edge_through_origin_is_boundary() {
        let pts = cols(2, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0]);
        let hd = hull_boundary_distance(&pts, 1e-9).unwrap();
        assert_eq!(hd.side, HullSide::Boundary);
        assert!(hd.distance <= 1e-15);
    }

    #[test]
    fn square_is_inside() {
        let pts = cols(2, &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0]);
        let hd = hull_boundary_distance(&pts, 1e-9).unwrap();
        assert_eq!(hd.side, HullSide::Inside);
        assert_relative_eq!(hd.distance, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn example1_columns_are_outside() {
        let r = 0.5f64.sqrt();
        let pts = cols(2, &[1.0, 0.0, r, -r, r, r]);
        let hd = hull_boundary_distance(&pts, 1e-9).unwrap();
        assert_eq!(hd.side, HullSide::Outside);
        assert_relative_eq!(hd.distance, r, epsilon = 1e-15);
    }

    #[test]
    fn one_dimensional_hulls() {
        let inside = hull_boundary_distance(&cols(1, &[1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(inside.side, HullSide::Inside);
        assert_relative_eq!(inside.distance, 1.0);
        let outside = hull_boundary_distance(&cols(1, &[1.0, 1.0]), 1e-9).unwrap();
        assert_eq!(outside.side, HullSide::Outside);
    }

    #[test]
    fn flat_hull_through_origin_is_degenerate() {
        let pts = cols(3, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            hull_boundary_distance(&pts, 1e-9),
            Err(Error::DegenerateHull)
        );
    }

    #[test]
    fn rejects_non_unit_points() {
        assert!(matches!(
            hull_boundary_distance(&cols(2, &[2.0, 0.0]), 1e-9),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn octahedron_inradius() {
        // ±e_i in ℝ³: nearest facet x+y+z = 1 at distance 1/√3.
        let mut pts = DMatrix::zeros(3, 6);
        for i in 0..3 {
            pts[(i, 2 * i)] = 1.0;
            pts[(i, 2 * i + 1)] = -1.0;
        }
        let hd = hull_boundary_distance(&pts, 1e-9).unwrap();
        assert_eq!(hd.side, HullSide::Inside);
        assert_relative_eq!(hd.distance, 1.0 / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn combination_count() {
        assert_eq!(binomial(12, 6), MAX_FACET_SUBSETS);
        let mut s = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut s, 4) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
