//! Column normalization, row balancing and their compositions.
//!
//! Every preconditioning is recorded as `Â = P·A·S` with `S` positive diagonal and
//! `P` nonsingular. A primal solution `x̂` of the preconditioned system maps back as
//! `S·x̂`, a dual solution `ŷ` as `Pᵀ·ŷ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{extreme_singular_values, MatrixJson, ProblemInstance, RANK_TOL};

/// Relative residual accepted when checking solutions of either system.
pub const SOLUTION_TOL: f64 = 1e-8;

/// Which preconditioning steps were applied, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    NormalizeOnly,
    BalanceOnly,
    NormalizeThenBalance,
    BalanceThenNormalize,
}

impl Order {
    pub const ALL: [Order; 4] = [
        Order::NormalizeOnly,
        Order::BalanceOnly,
        Order::NormalizeThenBalance,
        Order::BalanceThenNormalize,
    ];

    /// Short CLI spelling: `n`, `b`, `nb`, `bn`.
    pub fn short(&self) -> &'static str {
        match self {
            Order::NormalizeOnly => "n",
            Order::BalanceOnly => "b",
            Order::NormalizeThenBalance => "nb",
            Order::BalanceThenNormalize => "bn",
        }
    }

    /// Whether the final step leaves orthonormal rows (as opposed to unit columns).
    pub fn ends_balanced(&self) -> bool {
        matches!(self, Order::BalanceOnly | Order::NormalizeThenBalance)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Order::ALL
            .into_iter()
            .find(|o| o.short() == s || format!("{o:?}") == s)
            .ok_or_else(|| Error::Parse(format!("unknown order {s:?} (expected n, b, nb or bn)")))
    }
}

/// Certificate `Â = P·A·S` of a preconditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformRecord {
    pub order: Order,
    /// Diagonal of `S`, all strictly positive.
    pub s: DVector<f64>,
    pub p: DMatrix<f64>,
    pub a_hat: ProblemInstance,
}

impl TransformRecord {
    pub fn m(&self) -> usize {
        self.a_hat.m()
    }

    pub fn n(&self) -> usize {
        self.a_hat.n()
    }

    /// `max |Â − P·A·S|`.
    pub fn reconstruction_error(&self, a: &ProblemInstance) -> f64 {
        let pas = &self.p * a.matrix() * DMatrix::from_diagonal(&self.s);
        (self.a_hat.matrix() - pas).amax()
    }

    /// Recovers `A = P⁻¹·Â·S⁻¹`.
    pub fn original(&self) -> Result<DMatrix<f64>> {
        let lu = self.p.clone().lu();
        let mut a = lu
            .solve(self.a_hat.matrix())
            .ok_or(Error::RankDeficient { ratio: 0.0 })?;
        for (mut col, sj) in a.column_iter_mut().zip(self.s.iter()) {
            col /= *sj;
        }
        Ok(a)
    }

    /// Checks the structural invariants: `S > 0` and `P` numerically nonsingular.
    pub fn check(&self) -> Result<()> {
        if self.s.len() != self.n() || self.p.shape() != (self.m(), self.m()) {
            return Err(Error::Shape("record factors do not match A_hat".into()));
        }
        if let Some(j) = self.s.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::ZeroColumn(j + 1));
        }
        let (hi, lo) = extreme_singular_values(&self.p);
        if !(lo > RANK_TOL * hi) {
            return Err(Error::RankDeficient { ratio: lo / hi });
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(RecordJson {
            order: self.order,
            s: self.s.iter().copied().collect(),
            p: self
                .p
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            a_hat: MatrixJson::from_matrix(self.a_hat.matrix()),
        })
        .expect("plain numbers serialize")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: RecordJson = serde_json::from_value(value.clone())?;
        let a_hat = ProblemInstance::new(raw.a_hat.to_matrix()?)?;
        let m = a_hat.m();
        let p = MatrixJson {
            m,
            n: m,
            data: raw.p,
        }
        .to_matrix()?;
        let record = TransformRecord {
            order: raw.order,
            s: DVector::from_vec(raw.s),
            p,
            a_hat,
        };
        record.check()?;
        Ok(record)
    }
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    order: Order,
    #[serde(rename = "S")]
    s: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "A_hat")]
    a_hat: MatrixJson,
}

/// Scales every column to unit Euclidean length: `S = diag(1/‖a_i‖)`, `P = I`.
pub fn normalize_columns(a: &ProblemInstance) -> TransformRecord {
    let s = a.column_norms().map(|v| 1.0 / v);
    let a_hat = ProblemInstance::new(a.normalized_columns())
        .expect("column scaling preserves rank and nonzero columns");
    TransformRecord {
        order: Order::NormalizeOnly,
        s,
        p: DMatrix::identity(a.m(), a.m()),
        a_hat,
    }
}

/// Replaces `A` by `Qᵀ` where `Aᵀ = QR`: `S = I`, `P = R⁻ᵀ`.
pub fn balance_rows(a: &ProblemInstance) -> Result<TransformRecord> {
    let (q, r) = a.qr_of_transpose()?;
    let m = a.m();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(m, m))
        .ok_or(Error::RankDeficient { ratio: 0.0 })?;
    let a_hat = ProblemInstance::new(q.transpose())?;
    Ok(TransformRecord {
        order: Order::BalanceOnly,
        s: DVector::from_element(a.n(), 1.0),
        p: r_inv.transpose(),
        a_hat,
    })
}

/// Applies `order` and returns the composite certificate.
pub fn precondition(a: &ProblemInstance, order: Order) -> Result<TransformRecord> {
    match order {
        Order::NormalizeOnly => Ok(normalize_columns(a)),
        Order::BalanceOnly => balance_rows(a),
        Order::NormalizeThenBalance => {
            let first = normalize_columns(a);
            let second = balance_rows(&first.a_hat)?;
            Ok(TransformRecord {
                order,
                s: first.s,
                p: second.p,
                a_hat: second.a_hat,
            })
        }
        Order::BalanceThenNormalize => {
            let first = balance_rows(a)?;
            let second = normalize_columns(&first.a_hat);
            Ok(TransformRecord {
                order,
                s: second.s,
                p: first.p,
                a_hat: second.a_hat,
            })
        }
    }
}

/// Maps a solution `x̂` of `Âx̂ = 0, x̂ ≥ 0, x̂ ≠ 0` to `x = S·x̂`, a solution of the
/// original primal system.
pub fn map_primal_solution(record: &TransformRecord, x_hat: &DVector<f64>) -> Result<DVector<f64>> {
    if x_hat.len() != record.n() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} entries, got {}",
            record.n(),
            x_hat.len()
        )));
    }
    let norm = x_hat.norm();
    let scale = record.a_hat.norm_22() * norm;
    let residual = (record.a_hat.matrix() * x_hat).norm();
    let most_negative = x_hat.min().min(0.0);
    if norm == 0.0
        || !norm.is_finite()
        || residual > SOLUTION_TOL * scale
        || -most_negative > SOLUTION_TOL * norm
    {
        return Err(Error::NotASolution {
            residual: if norm == 0.0 {
                f64::INFINITY
            } else {
                residual.max(-most_negative)
            },
        });
    }
    Ok(x_hat.component_mul(&record.s))
}

/// Maps a solution `ŷ` of `Âᵀŷ ≥ 0, ŷ ≠ 0` to `y = Pᵀ·ŷ`, a solution of the
/// original dual system.
pub fn map_dual_solution(record: &TransformRecord, y_hat: &DVector<f64>) -> Result<DVector<f64>> {
    if y_hat.len() != record.m() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} entries, got {}",
            record.m(),
            y_hat.len()
        )));
    }
    let norm = y_hat.norm();
    let scale = record.a_hat.norm_22() * norm;
    let most_negative = (record.a_hat.matrix().transpose() * y_hat).min().min(0.0);
    if norm == 0.0 || !norm.is_finite() || -most_negative > SOLUTION_TOL * scale {
        return Err(Error::NotASolution {
            residual: if norm == 0.0 {
                f64::INFINITY
            } else {
                -most_negative
            },
        });
    }
    Ok(record.p.transpose() * y_hat)
}
