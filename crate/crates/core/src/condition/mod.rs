//! Condition numbers of the homogeneous pair `Ax = 0, x ≥ 0` / `Aᵀy ≥ 0`.

mod grassmann;
mod hull;

pub use grassmann::{
    grassmann_distance, grassmann_distance_with, orthant_gap_exceeds, orthant_sphere_min,
    GrassmannDistance, GrassmannSide, OrthantMin, MAX_EXACT_DIM,
};
pub use hull::{
    hull_boundary_distance, min_norm_point, nearest_facet, Facet, HullDistance, HullSide,
    MinNormPoint, MAX_FACET_SUBSETS,
};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{
    column_norms, extreme_singular_values, FeasibilityStatus, FeasibilityTag, ProblemInstance,
    Tolerances,
};
use crate::precondition::{precondition, Order};

/// Closed interval `[lo, hi]`; either end may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn to_json(self) -> Value {
        json!([extended(self.lo), extended(self.hi)])
    }
}

/// JSON number, or `"inf"` / `"-inf"` / `"nan"` for values JSON cannot carry.
pub fn extended(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// Grassmann condition number, which is undefined when `m = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrassmannValue {
    Finite(f64),
    Infinite,
    Degenerate,
}

impl GrassmannValue {
    fn from_cond(v: f64) -> Self {
        if v.is_finite() {
            GrassmannValue::Finite(v)
        } else {
            GrassmannValue::Infinite
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            GrassmannValue::Finite(v) => Some(v),
            GrassmannValue::Infinite => Some(f64::INFINITY),
            GrassmannValue::Degenerate => None,
        }
    }

    fn to_json(self) -> Value {
        match self {
            GrassmannValue::Finite(v) => json!(v),
            GrassmannValue::Infinite => json!("inf"),
            GrassmannValue::Degenerate => json!("degenerate"),
        }
    }
}

fn hull_of(a: &ProblemInstance, tol: &Tolerances) -> Result<HullDistance> {
    hull_boundary_distance(&a.normalized_columns(), tol.ill)
}

/// Gordan's alternative decided on the hull of the normalized columns.
pub fn classify_feasibility(a: &ProblemInstance) -> Result<FeasibilityStatus> {
    classify_feasibility_with(a, &Tolerances::default())
}

pub fn classify_feasibility_with(
    a: &ProblemInstance,
    tol: &Tolerances,
) -> Result<FeasibilityStatus> {
    let hull = hull_of(a, tol)?;
    Ok(status_from_hull(a, &hull))
}

fn status_from_hull(a: &ProblemInstance, hull: &HullDistance) -> FeasibilityStatus {
    match hull.side {
        HullSide::Outside => FeasibilityStatus {
            tag: FeasibilityTag::DualStrict,
            witness: &hull.nearest.point / hull.nearest.norm(),
            margin: hull.distance,
        },
        HullSide::Inside => FeasibilityStatus {
            tag: FeasibilityTag::PrimalStrict,
            witness: hull.nearest.weights.component_div(&a.column_norms()),
            margin: hull.distance,
        },
        HullSide::Boundary => {
            let facet = hull
                .facet
                .as_ref()
                .expect("boundary decisions carry a facet");
            FeasibilityStatus {
                tag: FeasibilityTag::IllPosed,
                witness: -&facet.normal,
                margin: hull.distance,
            }
        }
    }
}

/// `C_GCC(A) = 1 / dist(0, ∂conv{a_i/‖a_i‖})`, `+∞` inside the ill-posed band.
pub fn gcc(a: &ProblemInstance) -> Result<f64> {
    gcc_with(a, &Tolerances::default())
}

pub fn gcc_with(a: &ProblemInstance, tol: &Tolerances) -> Result<f64> {
    let hull = hull_of(a, tol)?;
    Ok(match hull.side {
        HullSide::Boundary => f64::INFINITY,
        _ => 1.0 / hull.distance,
    })
}

/// `C_Gr(A) = 1 / d(span(Aᵀ), Σ_m)`; `+∞` inside the ill-posed band,
/// [`Error::Degenerate`] when `m = n`.
pub fn grassmann_cond(a: &ProblemInstance) -> Result<f64> {
    grassmann_cond_with(a, &Tolerances::default())
}

pub fn grassmann_cond_with(a: &ProblemInstance, tol: &Tolerances) -> Result<f64> {
    let d = grassmann_distance_with(&a.row_space(), tol.ill)?;
    Ok(if d.side == GrassmannSide::IllPosed {
        f64::INFINITY
    } else {
        1.0 / d.distance
    })
}

fn grassmann_value(a: &ProblemInstance, tol: &Tolerances) -> Result<GrassmannValue> {
    match grassmann_cond_with(a, tol) {
        Ok(v) => Ok(GrassmannValue::from_cond(v)),
        Err(Error::Degenerate) => Ok(GrassmannValue::Degenerate),
        Err(e) => Err(e),
    }
}

/// Brackets for Renegar's `C_R^{1,2}` and `C_R^{2,2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenegarIntervals {
    /// After cross-tightening through `C^{2,2}/√n ≤ C^{1,2} ≤ √n·C^{2,2}`.
    pub renegar12: Interval,
    pub renegar22: Interval,
    /// `[C_GCC, col_ratio·C_GCC]` before tightening.
    pub raw12: Interval,
    /// `[C_Gr, sigma_ratio·C_Gr]` before tightening.
    pub raw22: Interval,
}

pub fn renegar_intervals(a: &ProblemInstance) -> Result<RenegarIntervals> {
    renegar_intervals_with(a, &Tolerances::default())
}

pub fn renegar_intervals_with(a: &ProblemInstance, tol: &Tolerances) -> Result<RenegarIntervals> {
    let g = gcc_with(a, tol)?;
    let gr = grassmann_value(a, tol)?;
    intervals_from(a, g, gr)
}

fn intervals_from(a: &ProblemInstance, g: f64, gr: GrassmannValue) -> Result<RenegarIntervals> {
    if !g.is_finite() {
        return Err(Error::IllPosed { distance: 1.0 / g });
    }
    let root_n = (a.n() as f64).sqrt();
    let raw12 = Interval::new(g, a.column_ratio() * g);
    let raw22 = match gr {
        GrassmannValue::Finite(v) => Interval::new(v, a.sigma_ratio() * v),
        GrassmannValue::Infinite => return Err(Error::IllPosed { distance: 0.0 }),
        // Σ_m is empty; only the norm-equivalence bracket and C_R ≥ 1 remain.
        GrassmannValue::Degenerate => {
            Interval::new((raw12.lo / root_n).max(1.0), root_n * raw12.hi)
        }
    };
    let renegar12 = Interval::new(
        raw12.lo.max(raw22.lo / root_n),
        raw12.hi.min(root_n * raw22.hi),
    );
    let renegar22 = Interval::new(
        raw22.lo.max(renegar12.lo / root_n),
        raw22.hi.min(root_n * renegar12.hi),
    );
    Ok(RenegarIntervals {
        renegar12,
        renegar22,
        raw12,
        raw22,
    })
}

/// Everything the crate computes about one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub feasibility: FeasibilityStatus,
    pub gcc: f64,
    pub grassmann: GrassmannValue,
    pub renegar12: Interval,
    pub renegar22: Interval,
    pub col_ratio: f64,
    pub sigma_ratio: f64,
}

impl ConditionReport {
    pub fn compute(a: &ProblemInstance) -> Result<Self> {
        Self::compute_with(a, &Tolerances::default())
    }

    pub fn compute_with(a: &ProblemInstance, tol: &Tolerances) -> Result<Self> {
        let hull = hull_of(a, tol)?;
        let feasibility = status_from_hull(a, &hull);
        let gcc = if feasibility.is_ill_posed() {
            f64::INFINITY
        } else {
            1.0 / hull.distance
        };
        let grassmann = grassmann_value(a, tol)?;
        let (renegar12, renegar22) = if feasibility.is_ill_posed() {
            (
                Interval::point(f64::INFINITY),
                Interval::point(f64::INFINITY),
            )
        } else {
            match intervals_from(a, gcc, grassmann) {
                Ok(iv) => (iv.renegar12, iv.renegar22),
                Err(Error::IllPosed { .. }) => (
                    Interval::point(f64::INFINITY),
                    Interval::point(f64::INFINITY),
                ),
                Err(e) => return Err(e),
            }
        };
        Ok(ConditionReport {
            feasibility,
            gcc,
            grassmann,
            renegar12,
            renegar22,
            col_ratio: a.column_ratio(),
            sigma_ratio: a.sigma_ratio(),
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "feasibility": {
                "tag": self.feasibility.tag.as_str(),
                "witness": self.feasibility.witness.iter().copied().collect::<Vec<f64>>(),
                "margin": extended(self.feasibility.margin),
            },
            "gcc": extended(self.gcc),
            "grassmann": self.grassmann.to_json(),
            "renegar12": self.renegar12.to_json(),
            "renegar22": self.renegar22.to_json(),
            "col_ratio": extended(self.col_ratio),
            "sigma_ratio": extended(self.sigma_ratio),
        })
    }
}

/// One side of a two-sided bound, `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySlack {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub scale: f64,
}

impl InequalitySlack {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        InequalitySlack {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            scale: lhs.abs().max(rhs.abs()).max(1.0),
        }
    }

    /// `slack / scale`.
    pub fn relative(&self) -> f64 {
        self.slack / self.scale
    }

    pub fn holds(&self) -> bool {
        self.slack >= -THEOREM2_TOL * self.scale
    }
}

/// Relative slack tolerance of [`theorem2_check`].
pub const THEOREM2_TOL: f64 = 1e-9;

/// Quantities of the two combined preconditionings and the four inequalities
///
/// ```text
/// (NB)  C_GCC(Â)/√n ≤ C_R^{2,2}(Â) = C_Gr(Â) ≤ √n·C_GCC(A)
/// (BN)  C_Gr(Â)/√n  ≤ C_R^{1,2}(Â) = C_GCC(Â) ≤ √n·C_Gr(A)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Check {
    pub n: usize,
    pub gcc_a: f64,
    pub grassmann_a: f64,
    pub gcc_nb: f64,
    pub grassmann_nb: f64,
    pub gcc_bn: f64,
    pub grassmann_bn: f64,
    pub renegar_a: RenegarIntervals,
    /// Its `C_R^{2,2}` bracket collapses to a point up to rounding.
    pub renegar_nb: RenegarIntervals,
    /// Its `C_R^{1,2}` bracket collapses to a point up to rounding.
    pub renegar_bn: RenegarIntervals,
    pub inequalities: Vec<InequalitySlack>,
}

impl Theorem2Check {
    pub fn pass(&self) -> bool {
        self.inequalities.iter().all(InequalitySlack::holds)
    }

    pub fn min_relative_slack(&self) -> f64 {
        self.inequalities
            .iter()
            .map(InequalitySlack::relative)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "gcc_a": extended(self.gcc_a),
            "grassmann_a": extended(self.grassmann_a),
            "gcc_nb": extended(self.gcc_nb),
            "grassmann_nb": extended(self.grassmann_nb),
            "gcc_bn": extended(self.gcc_bn),
            "grassmann_bn": extended(self.grassmann_bn),
            "pass": self.pass(),
            "inequalities": self.inequalities.iter().map(|s| json!({
                "name": s.name,
                "lhs": extended(s.lhs),
                "rhs": extended(s.rhs),
                "slack": extended(s.slack),
            })).collect::<Vec<_>>(),
        })
    }
}

pub fn theorem2_check(a: &ProblemInstance) -> Result<Theorem2Check> {
    let tol = Tolerances::default();
    let root_n = (a.n() as f64).sqrt();
    let gcc_a = gcc_with(a, &tol)?;
    let grassmann_a = grassmann_cond_with(a, &tol)?;
    if !gcc_a.is_finite() || !grassmann_a.is_finite() {
        return Err(Error::IllPosed { distance: 0.0 });
    }
    let renegar_a = intervals_from(a, gcc_a, GrassmannValue::Finite(grassmann_a))?;

    let nb = precondition(a, Order::NormalizeThenBalance)?.a_hat;
    let bn = precondition(a, Order::BalanceThenNormalize)?.a_hat;
    let gcc_nb = gcc_with(&nb, &tol)?;
    let grassmann_nb = grassmann_cond_with(&nb, &tol)?;
    let gcc_bn = gcc_with(&bn, &tol)?;
    let grassmann_bn = grassmann_cond_with(&bn, &tol)?;
    let nb_iv = intervals_from(&nb, gcc_nb, GrassmannValue::from_cond(grassmann_nb))?;
    let bn_iv = intervals_from(&bn, gcc_bn, GrassmannValue::from_cond(grassmann_bn))?;

    // The middle terms use the conservative end of each collapsed bracket.
    let inequalities = vec![
        InequalitySlack::new("nb_lower", gcc_nb / root_n, nb_iv.renegar22.lo),
        InequalitySlack::new("nb_upper", nb_iv.renegar22.hi, root_n * gcc_a),
        InequalitySlack::new("bn_lower", grassmann_bn / root_n, bn_iv.renegar12.lo),
        InequalitySlack::new("bn_upper", bn_iv.renegar12.hi, root_n * grassmann_a),
    ];
    Ok(Theorem2Check {
        n: a.n(),
        gcc_a,
        grassmann_a,
        gcc_nb,
        grassmann_nb,
        gcc_bn,
        grassmann_bn,
        renegar_a,
        renegar_nb: nb_iv,
        renegar_bn: bn_iv,
        inequalities,
    })
}

/// Gordan classification of an arbitrary finite matrix, tolerating zero columns
/// and rank deficiency (which the perturbation searches run into).
///
/// A zero column makes the primal system feasible; rank deficiency makes the
/// dual one feasible.
pub fn classify_matrix(a: &DMatrix<f64>, ill_tol: f64) -> FeasibilityTag {
    let norms = column_norms(a);
    let largest = norms.max();
    if largest == 0.0 {
        return FeasibilityTag::IllPosed;
    }
    let keep: Vec<usize> = (0..a.ncols())
        .filter(|&j| norms[j] > 1e-14 * largest)
        .collect();
    let has_zero_column = keep.len() < a.ncols();
    let mut unit = DMatrix::zeros(a.nrows(), keep.len());
    for (c, &j) in keep.iter().enumerate() {
        unit.set_column(c, &(a.column(j) / norms[j]));
    }
    let (smax, smin) = extreme_singular_values(a);
    let rank_deficient = a.nrows() > a.ncols() || smin <= crate::model::RANK_TOL * smax;

    let mnp = min_norm_point(&unit);
    let zero_in_hull = mnp.norm() <= ill_tol;
    let primal = has_zero_column || zero_in_hull;
    let dual = rank_deficient
        || !zero_in_hull
        || match nearest_facet(&unit) {
            Ok(Some(f)) => f.offset <= ill_tol,
            _ => true,
        };
    match (primal, dual) {
        (true, false) => FeasibilityTag::PrimalStrict,
        (false, true) => FeasibilityTag::DualStrict,
        _ => FeasibilityTag::IllPosed,
    }
}

/// Inequalities of a witness, for substitution checks: `(‖A·x‖, min x)` for a
/// primal witness or `(min_i a_iᵀy / ‖a_i‖, ‖y‖)` for a dual one.
pub fn witness_residuals(a: &ProblemInstance, status: &FeasibilityStatus) -> (f64, f64) {
    match status.tag {
        FeasibilityTag::PrimalStrict => {
            let x: &DVector<f64> = &status.witness;
            ((a.matrix() * x).norm(), x.min())
        }
        _ => {
            let scaled =
                (a.matrix().transpose() * &status.witness).component_div(&a.column_norms());
            (scaled.min(), status.witness.norm())
        }
    }
}
