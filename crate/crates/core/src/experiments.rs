//! Worked example families and randomized sweeps of the two-sided bounds
//! satisfied by the combined preconditionings.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::{DMatrix, SVD};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::condition::{
    classify_feasibility, extended, gcc, grassmann_cond, theorem2_check, Theorem2Check,
};
use crate::error::{Error, Result};
use crate::model::{matrix_to_json_value, ProblemInstance, ILL_TOL};
use crate::precondition::{precondition, Order};
use crate::rng::{gaussian_matrix, stream, unit_vector, StreamRng};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "INEQCOND_THREADS";

/// One of the four two-column-family examples, at a given `ε`.
///
/// Examples 1 and 3 compare `C_GCC` before and after preconditioning, examples
/// 2 and 4 compare `C_Gr`. Examples 2 and 4 need `0 < ε < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleFixture {
    pub id: u8,
    pub epsilon: f64,
}

/// A closed-form value attached to an example.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub quantity: String,
    pub value: f64,
}

impl ExampleFixture {
    pub fn new(id: u8, epsilon: f64) -> Result<Self> {
        if !(1..=4).contains(&id) {
            return Err(Error::Unsupported(format!("no example with id {id}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Unsupported(format!(
                "example {id} needs ε > 0, got {epsilon}"
            )));
        }
        if matches!(id, 2 | 4) && epsilon >= 0.5 {
            return Err(Error::Unsupported(format!(
                "example {id} needs 0 < ε < 1/2, got {epsilon}"
            )));
        }
        Ok(ExampleFixture { id, epsilon })
    }

    pub fn matrix(&self) -> Result<ProblemInstance> {
        let e = self.epsilon;
        let rows = match self.id {
            1 => [[2.0 / e, 1.0, 1.0], [0.0, -1.0, 1.0]],
            2 => [[-e, -1.0, 1.0], [0.0, -1.0, 1.0 + e]],
            3 => [[1.0 + e, 1.0 + e, -1.0 + e], [-1.0, -1.0, 1.0]],
            _ => [[2.0 * e, 1.0, 1.0], [0.0, -1.0, 1.0]],
        };
        ProblemInstance::new(DMatrix::from_fn(2, 3, |i, j| rows[i][j]))
    }

    /// The preconditioning order the example studies.
    pub fn order(&self) -> Order {
        match self.id {
            1 | 4 => Order::BalanceThenNormalize,
            _ => Order::NormalizeThenBalance,
        }
    }

    /// `δ = 1 + 3(1+ε)²`.
    pub fn delta(&self) -> f64 {
        1.0 + 3.0 * (1.0 + self.epsilon).powi(2)
    }

    /// `θ = 1/√(δ+ε²)`.
    pub fn theta(&self) -> f64 {
        1.0 / (self.delta() + self.epsilon.powi(2)).sqrt()
    }

    /// `β = √((1+(1+ε)²)/2)`.
    pub fn beta(&self) -> f64 {
        ((1.0 + (1.0 + self.epsilon).powi(2)) / 2.0).sqrt()
    }

    /// `γ = √(1+(1−ε)²)`.
    pub fn gamma(&self) -> f64 {
        (1.0 + (1.0 - self.epsilon).powi(2)).sqrt()
    }

    /// Closed forms for the condition numbers before and after preconditioning.
    pub fn expected(&self) -> Vec<Expectation> {
        let e = self.epsilon;
        let pairs: [(&str, f64); 2] = match self.id {
            1 => [
                ("gcc(A)", 2f64.sqrt()),
                ("gcc(A_hat)", (2.0 * (1.0 + e * e)).sqrt() / e),
            ],
            2 => [
                ("grassmann(A)", (2.0 + (1.0 + e).powi(2)).sqrt()),
                ("grassmann(A_hat)", (1.0 + self.delta() / (e * e)).sqrt()),
            ],
            3 => [
                ("gcc(A)", (2.0 + 2.0 * (1.0 + e).powi(2)).sqrt() / e),
                ("gcc(A_hat)", 2f64.sqrt()),
            ],
            _ => [
                ("grassmann(A)", (1.0 + 1.0 / (2.0 * e * e)).sqrt()),
                ("grassmann(A_hat)", (2.0 + e * e).sqrt()),
            ],
        };
        pairs
            .iter()
            .map(|&(q, v)| Expectation {
                quantity: q.to_string(),
                value: v,
            })
            .collect()
    }

    /// The preconditioned matrix in closed form.
    pub fn displayed_a_hat(&self) -> DMatrix<f64> {
        let e = self.epsilon;
        let s2 = 2f64.sqrt();
        let (scale, rows) = match self.id {
            1 => {
                let c = (2.0 * (1.0 + e * e)).sqrt();
                let r = (2.0 + e * e).sqrt();
                (1.0 / c, [[c, e, e], [0.0, -r, r]])
            }
            2 => {
                let (d, t) = (self.delta(), self.theta());
                let r = (1.0 + (1.0 + e).powi(2)).sqrt();
                (
                    1.0 / d.sqrt(),
                    [
                        [-t * d, -s2 * t * e * (1.0 + e), -t * e * r],
                        [0.0, -r, s2 * (1.0 + e)],
                    ],
                )
            }
            3 => {
                let (b, g) = (self.beta(), self.gamma());
                (
                    1.0 / (2.0 * g * g + 2.0 * b * b).sqrt(),
                    [[b, b, s2 * g], [-g, -g, s2 * b]],
                )
            }
            _ => {
                let c = (2.0 * (1.0 + e * e)).sqrt();
                let r = (1.0 + 2.0 * e * e).sqrt();
                (1.0 / c, [[c, 1.0, 1.0], [0.0, -r, r]])
            }
        };
        DMatrix::from_fn(2, 3, |i, j| scale * rows[i][j])
    }

    /// Whether the closed form is the computed matrix itself, or only agrees
    /// with it up to a left orthogonal factor (same row space, another
    /// orthonormal basis).
    pub fn displayed_is_exact(&self) -> bool {
        matches!(self.id, 1 | 4)
    }
}

/// `U·m` for the orthogonal `U` minimizing `‖U·m − target‖_F`.
pub fn align_rows(m: &DMatrix<f64>, target: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = SVD::new(target * m.transpose(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    u * v_t * m
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRow {
    pub quantity: String,
    pub computed: f64,
    pub expected: f64,
    /// `|computed − expected| / max(|expected|, 1)`.
    pub rel_error: f64,
}

impl ExampleRow {
    fn new(quantity: String, computed: f64, expected: f64) -> Self {
        let rel_error = (computed - expected).abs() / expected.abs().max(1.0);
        ExampleRow {
            quantity,
            computed,
            expected,
            rel_error: if rel_error.is_nan() {
                f64::INFINITY
            } else {
                rel_error
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleTable {
    pub id: u8,
    pub epsilon: f64,
    pub rows: Vec<ExampleRow>,
}

impl ExampleTable {
    pub fn row(&self, quantity: &str) -> Option<&ExampleRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }

    pub fn failures(&self, tol: f64) -> Vec<&ExampleRow> {
        self.rows.iter().filter(|r| !(r.rel_error <= tol)).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "epsilon": self.epsilon,
            "rows": self.rows.iter().map(|r| json!({
                "quantity": r.quantity,
                "computed": extended(r.computed),
                "expected": extended(r.expected),
                "rel_error": extended(r.rel_error),
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for ExampleTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "example {} (eps = {})", self.id, self.epsilon)?;
        for r in &self.rows {
            writeln!(
                f,
                "  {:<26} {:>22.15e} {:>22.15e} {:>10.3e}",
                r.quantity, r.computed, r.expected, r.rel_error
            )?;
        }
        Ok(())
    }
}

/// Computes every quantity an example states and compares with its closed form.
pub fn run_example(id: u8, epsilon: f64) -> Result<ExampleTable> {
    let fx = ExampleFixture::new(id, epsilon)?;
    let a = fx.matrix()?;
    let a_hat = precondition(&a, fx.order())?.a_hat;

    let mut rows = Vec::new();
    for exp in fx.expected() {
        let target = if exp.quantity.ends_with("(A)") {
            &a
        } else {
            &a_hat
        };
        let computed = if exp.quantity.starts_with("gcc") {
            gcc(target)?
        } else {
            grassmann_cond(target)?
        };
        rows.push(ExampleRow::new(exp.quantity, computed, exp.value));
    }

    let displayed = fx.displayed_a_hat();
    let (computed, suffix) = if fx.displayed_is_exact() {
        (a_hat.matrix().clone(), "")
    } else {
        (align_rows(a_hat.matrix(), &displayed), " aligned")
    };
    for i in 0..2 {
        for j in 0..3 {
            rows.push(ExampleRow::new(
                format!("A_hat[{i},{j}]{suffix}"),
                computed[(i, j)],
                displayed[(i, j)],
            ));
        }
    }
    Ok(ExampleTable { id, epsilon, rows })
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    /// I.i.d. standard normal entries.
    Gaussian,
    /// Columns uniform on the unit sphere.
    UniformSphereColumns,
}

impl Ensemble {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ensemble::Gaussian => "gaussian",
            Ensemble::UniformSphereColumns => "sphere",
        }
    }

    pub fn draw(&self, rng: &mut StreamRng, m: usize, n: usize) -> DMatrix<f64> {
        match self {
            Ensemble::Gaussian => gaussian_matrix(rng, m, n),
            Ensemble::UniformSphereColumns => {
                let mut a = DMatrix::zeros(m, n);
                for j in 0..n {
                    a.set_column(j, &unit_vector(rng, m));
                }
                a
            }
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Ensemble::Gaussian),
            "sphere" | "uniform-sphere-columns" => Ok(Ensemble::UniformSphereColumns),
            other => Err(Error::Parse(format!("unknown ensemble `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn new(m: usize, n: usize, trials: usize, seed: u64) -> Self {
        SweepConfig {
            m,
            n,
            trials,
            seed,
            ensemble: Ensemble::Gaussian,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(Error::Shape(format!(
                "sweeps need 1 <= m < n, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::Shape("sweeps need at least one trial".into()));
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "ensemble": self.ensemble.as_str(),
        })
    }
}

/// Draws with a hull margin at most this many `τ_ill` are replaced.
const MARGIN_FACTOR: f64 = 10.0;
const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    pub redraws: usize,
    pub matrix: DMatrix<f64>,
    pub check: Theorem2Check,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub records: Vec<TrialRecord>,
}

impl SweepReport {
    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| !r.check.pass()).count()
    }

    /// Smallest relative slack over every trial and inequality.
    pub fn min_slack(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.check.min_relative_slack())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn redraws(&self) -> usize {
        self.records.iter().map(|r| r.redraws).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn to_json(&self) -> Value {
        let series: [(&str, fn(&Theorem2Check) -> f64); 7] = [
            ("min_relative_slack", Theorem2Check::min_relative_slack),
            ("gcc_a", |c| c.gcc_a),
            ("gcc_nb", |c| c.gcc_nb),
            ("gcc_bn", |c| c.gcc_bn),
            ("grassmann_a", |c| c.grassmann_a),
            ("grassmann_nb", |c| c.grassmann_nb),
            ("grassmann_bn", |c| c.grassmann_bn),
        ];
        let mut quantiles = serde_json::Map::new();
        for (name, f) in series {
            let values: Vec<f64> = self.records.iter().map(|r| f(&r.check)).collect();
            quantiles.insert(name.to_string(), quantile_summary(values));
        }
        let failures: Vec<Value> = self
            .records
            .iter()
            .filter(|r| !r.check.pass())
            .map(|r| {
                json!({
                    "trial": r.index,
                    "matrix": matrix_to_json_value(&r.matrix),
                    "check": r.check.to_json(),
                })
            })
            .collect();
        json!({
            "config": self.config.to_json(),
            "violations": self.violations(),
            "min_slack": extended(self.min_slack()),
            "redraws": self.redraws(),
            "quantiles": quantiles,
            "failures": failures,
        })
    }
}

fn quantile_summary(mut values: Vec<f64>) -> Value {
    values.sort_by(f64::total_cmp);
    let pick = |q: f64| {
        let k = ((values.len() - 1) as f64 * q).round() as usize;
        extended(values[k])
    };
    json!({
        "min": pick(0.0),
        "p10": pick(0.1),
        "p50": pick(0.5),
        "p90": pick(0.9),
        "max": pick(1.0),
    })
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::Parse(format!(
                "{THREADS_ENV} must be a positive integer, got `{raw}`"
            ))),
        },
    }
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_cap()? {
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))
}

/// Draws a validated instance whose hull margin clears the ill-posed band.
pub fn draw_well_posed(
    rng: &mut StreamRng,
    m: usize,
    n: usize,
    ensemble: Ensemble,
) -> Result<(ProblemInstance, usize)> {
    for redraws in 0..MAX_REDRAWS {
        let Ok(a) = ProblemInstance::new(ensemble.draw(rng, m, n)) else {
            continue;
        };
        if classify_feasibility(&a)?.margin > MARGIN_FACTOR * ILL_TOL {
            return Ok((a, redraws));
        }
    }
    Err(Error::BudgetExhausted)
}

/// Bound check of a single instance.
pub fn run_trial(a: &ProblemInstance) -> Result<Theorem2Check> {
    theorem2_check(a)
}

/// Runs the trials in parallel, each from its own stream `(seed, trial)`; the
/// report is independent of the thread count.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let records: Result<Vec<TrialRecord>> = pool()?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|index| {
                let mut rng = stream(config.seed, index as u64);
                let (a, redraws) = draw_well_posed(&mut rng, config.m, config.n, config.ensemble)?;
                let check = run_trial(&a)?;
                Ok(TrialRecord {
                    index,
                    redraws,
                    matrix: a.into_matrix(),
                    check,
                })
            })
            .collect()
    });
    Ok(SweepReport {
        config: config.clone(),
        records: records?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GRID: [f64; 4] = [0.3, 0.1, 0.03, 0.01];

    #[test]
    fn admissibility() {
        assert!(ExampleFixture::new(2, 0.49).is_ok());
        assert!(ExampleFixture::new(4, 0.5).is_err());
        assert!(ExampleFixture::new(1, 0.9).is_ok());
        assert!(ExampleFixture::new(1, 0.0).is_err());
        assert!(ExampleFixture::new(5, 0.1).is_err());
        for id in 1..=4 {
            for eps in [0.49, 0.3, 0.01, 1e-4] {
                ExampleFixture::new(id, eps).unwrap().matrix().unwrap();
            }
        }
    }

    #[test]
    fn example_symbols() {
        let fx = ExampleFixture::new(2, 0.1).unwrap();
        assert_relative_eq!(fx.delta(), 1.0 + 3.0 * 1.21, max_relative = 1e-15);
        assert_relative_eq!(
            fx.theta(),
            1.0 / (4.63f64 + 0.01).sqrt(),
            max_relative = 1e-15
        );
        let fx = ExampleFixture::new(3, 0.1).unwrap();
        assert_relative_eq!(fx.beta(), (2.21f64 / 2.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(fx.gamma(), 1.81f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn examples_1_2_4_reproduce() {
        for id in [1, 2, 4] {
            for eps in GRID {
                let t = run_example(id, eps).unwrap();
                assert!(t.max_rel_error() <= 1e-9, "{t}");
            }
        }
    }

    #[test]
    fn example_1_values() {
        let t = run_example(1, 0.1).unwrap();
        assert_relative_eq!(
            t.row("gcc(A_hat)").unwrap().computed,
            2.02f64.sqrt() / 0.1,
            max_relative = 1e-10
        );
        let t = run_example(4, 0.1).unwrap();
        assert_relative_eq!(
            t.row("grassmann(A)").unwrap().computed,
            51f64.sqrt(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            t.row("grassmann(A_hat)").unwrap().computed,
            2.01f64.sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn example_3_preconditioned_side() {
        for eps in GRID {
            let t = run_example(3, eps).unwrap();
            assert!(t.row("gcc(A_hat)").unwrap().rel_error <= 1e-12);
            for r in t.rows.iter().filter(|r| r.quantity.starts_with("A_hat")) {
                assert!(r.rel_error <= 1e-10, "{t}");
            }
        }
    }

    /// The original matrix of example 3 has two distinct column directions, so
    /// its hull is a segment and `1/C_GCC` is the distance from the origin to it.
    #[test]
    fn example_3_original_matches_segment_distance() {
        for eps in GRID {
            let u = DMatrix::from_column_slice(2, 1, &[1.0 + eps, -1.0]).normalize();
            let v = DMatrix::from_column_slice(2, 1, &[-1.0 + eps, 1.0]).normalize();
            let d = &v - &u;
            let t = (-(u.dot(&d)) / d.dot(&d)).clamp(0.0, 1.0);
            let dist = (&u + &d * t).norm();
            let t3 = run_example(3, eps).unwrap();
            assert_relative_eq!(
                t3.row("gcc(A)").unwrap().computed,
                1.0 / dist,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn alignment_recovers_rotation() {
        let m = DMatrix::from_row_slice(2, 3, &[0.6, 0.8, 0.0, 0.0, 0.0, 1.0]);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert_relative_eq!(align_rows(&m, &(&r * &m)), &r * &m, epsilon = 1e-14);
    }

    #[test]
    fn small_sweep_passes_and_is_deterministic() {
        let cfg = SweepConfig::new(2, 4, 40, 42);
        let a = run_sweep(&cfg).unwrap();
        assert_eq!(a.violations(), 0);
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let mut sphere = cfg.clone();
        sphere.ensemble = Ensemble::UniformSphereColumns;
        assert!(run_sweep(&sphere).unwrap().passed());
    }

    #[test]
    fn sweep_rejects_bad_shapes() {
        assert!(matches!(
            run_sweep(&SweepConfig::new(4, 3, 1, 0)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            run_sweep(&SweepConfig::new(2, 3, 0, 0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn injected_example_trial_matches_table() {
        let fx = ExampleFixture::new(1, 0.1).unwrap();
        let check = run_trial(&fx.matrix().unwrap()).unwrap();
        let t = run_example(1, 0.1).unwrap();
        assert_relative_eq!(
            check.gcc_a,
            t.row("gcc(A)").unwrap().computed,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            check.gcc_bn,
            t.row("gcc(A_hat)").unwrap().computed,
            max_relative = 1e-14
        );
        assert!(check.pass());
    }
}
