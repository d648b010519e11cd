//! Acceptance suite: every criterion runs at its stated tolerance and prints a
//! single PASS/FAIL line. The process fails if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use ineqcond::condition::{
    classify_feasibility, classify_matrix, gcc, grassmann_cond, grassmann_distance,
    renegar_intervals,
};
use ineqcond::experiments::{
    align_rows, draw_well_posed, run_example, run_sweep, Ensemble, ExampleFixture, SweepConfig,
    THREADS_ENV,
};
use ineqcond::model::{extreme_singular_values, FeasibilityTag, ProblemInstance, ILL_TOL};
use ineqcond::oracles::{
    gcc_sampling, grassmann_perturbation_search, renegar_perturbation_search, NormPair,
};
use ineqcond::precondition::{precondition, Order};
use ineqcond::rng::{
    gaussian_matrix, random_nonsingular, random_positive_diagonal, stream, unit_vector, StreamRng,
};

const EPS_GRID: [f64; 4] = [0.3, 0.1, 0.03, 0.01];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn well_posed(rng: &mut StreamRng, m: usize, n: usize) -> ProblemInstance {
    draw_well_posed(rng, m, n, Ensemble::Gaussian).unwrap().0
}

fn with_tag(rng: &mut StreamRng, m: usize, n: usize, tag: FeasibilityTag) -> ProblemInstance {
    loop {
        let a = well_posed(rng, m, n);
        if classify_feasibility(&a).unwrap().tag == tag {
            return a;
        }
    }
}

/// Closed-form condition numbers of the four example families.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for eps in EPS_GRID {
        for id in 1..=4 {
            let table = run_example(id, eps).unwrap();
            for row in table
                .rows
                .iter()
                .filter(|r| !r.quantity.starts_with("A_hat"))
            {
                let err = rel(row.computed, row.expected);
                worst = worst.max(err);
                if !(err <= 1e-6) {
                    bad.push(format!(
                        "ex{id} eps={eps} {}: computed {:.6} vs stated {:.6} (rel {:.2e})",
                        row.quantity, row.computed, row.expected, err
                    ));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = bad.is_empty() && secs <= 10.0;
    Outcome::new(
        pass,
        format!(
            "32 quantities, max rel error {worst:.2e}, {secs:.2}s; mismatches: [{}]",
            bad.join("; ")
        ),
    )
}

/// Printed preconditioned matrices.
fn criterion_2() -> Outcome {
    let mut worst_exact = 0.0f64;
    let mut worst_aligned = 0.0f64;
    for eps in EPS_GRID {
        for id in [1u8, 4, 2] {
            let fx = ExampleFixture::new(id, eps).unwrap();
            let a_hat = precondition(&fx.matrix().unwrap(), fx.order())
                .unwrap()
                .a_hat;
            let shown = fx.displayed_a_hat();
            if id == 2 {
                // Another orthonormal basis of the same row space.
                let aligned = align_rows(a_hat.matrix(), &shown);
                worst_aligned = worst_aligned.max((aligned - &shown).amax());
            } else {
                worst_exact = worst_exact.max((a_hat.matrix() - &shown).amax());
            }
        }
    }
    Outcome::new(
        worst_exact <= 1e-10 && worst_aligned <= 1e-10,
        format!("examples 1,4 entrywise max |diff| {worst_exact:.2e}; example 2 up to a left orthogonal factor {worst_aligned:.2e}"),
    )
}

/// Zero violations of the two-sided bounds over seeded Gaussian sweeps.
fn criterion_3() -> Outcome {
    let previous = std::env::var(THREADS_ENV).ok();
    std::env::set_var(THREADS_ENV, "1");
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (m, n, seed) in [(2, 4, 42), (3, 6, 43), (5, 10, 44)] {
        let report = run_sweep(&SweepConfig::new(m, n, 1000, seed)).unwrap();
        pass &= report.violations() == 0;
        parts.push(format!(
            "({m},{n}) seed {seed}: {} violations, min rel slack {:.3}",
            report.violations(),
            report.min_slack()
        ));
    }
    match previous {
        Some(v) => std::env::set_var(THREADS_ENV, v),
        None => std::env::remove_var(THREADS_ENV),
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 300.0;
    Outcome::new(
        pass,
        format!("{}; {secs:.1}s single-threaded", parts.join("; ")),
    )
}

/// Collapse of the brackets after normalization and after balancing.
fn criterion_4() -> Outcome {
    let shapes = [(2, 3), (2, 4), (3, 5), (3, 6), (4, 7)];
    let mut worst12 = 0.0f64;
    let mut worst22 = 0.0f64;
    let mut worst_sigma = 0.0f64;
    for k in 0..200 {
        let (m, n) = shapes[k % shapes.len()];
        let mut rng = stream(4, k as u64);
        let a = well_posed(&mut rng, m, n);
        let normalized = precondition(&a, Order::NormalizeOnly).unwrap().a_hat;
        let iv = renegar_intervals(&normalized).unwrap().renegar12;
        worst12 = worst12.max(iv.width() / iv.lo);
        let balanced = precondition(&a, Order::BalanceOnly).unwrap().a_hat;
        let iv = renegar_intervals(&balanced).unwrap().renegar22;
        worst22 = worst22.max(iv.width() / iv.lo);
        let (hi, lo) = extreme_singular_values(balanced.matrix());
        worst_sigma = worst_sigma.max((hi - 1.0).abs()).max((lo - 1.0).abs());
    }
    Outcome::new(
        worst12 <= 1e-9 && worst22 <= 1e-9 && worst_sigma <= 1e-10,
        format!("200 instances: max rel width (1,2) {worst12:.2e}, (2,2) {worst22:.2e}; max |sigma - 1| {worst_sigma:.2e}"),
    )
}

/// Column-scaling invariance of C_GCC, row-operation invariance of C_Gr.
fn criterion_5() -> Outcome {
    let shapes = [(2, 4), (3, 5), (3, 6), (4, 8)];
    let mut worst_gcc = 0.0f64;
    let mut worst_gr = 0.0f64;
    for k in 0..200 {
        let (m, n) = shapes[k % shapes.len()];
        let mut rng = stream(5, k as u64);
        let a = well_posed(&mut rng, m, n);
        let d = random_positive_diagonal(&mut rng, n, 1e3);
        let scaled = ProblemInstance::new(a.matrix() * DMatrix::from_diagonal(&d)).unwrap();
        worst_gcc = worst_gcc.max(rel(gcc(&scaled).unwrap(), gcc(&a).unwrap()));
        let p = random_nonsingular(&mut rng, m, 1e3);
        let mixed = ProblemInstance::new(&p * a.matrix()).unwrap();
        worst_gr = worst_gr.max(rel(
            grassmann_cond(&mixed).unwrap(),
            grassmann_cond(&a).unwrap(),
        ));
    }
    Outcome::new(
        worst_gcc <= 1e-9 && worst_gr <= 1e-8,
        format!("200 draws each: max rel diff C_GCC {worst_gcc:.2e}, C_Gr {worst_gr:.2e}"),
    )
}

/// Exact values against the brute-force oracles.
fn criterion_6() -> Outcome {
    // (a) sphere sampling
    let mut worst_a = 0.0f64;
    let mut below_a = 0;
    for k in 0..50 {
        let (m, n) = if k % 2 == 0 { (2, 4) } else { (3, 5) };
        let mut rng = stream(61, k as u64);
        let a = with_tag(&mut rng, m, n, FeasibilityTag::DualStrict);
        let exact = gcc(&a).unwrap();
        let sampled = gcc_sampling(&a, 100_000).unwrap().value;
        worst_a = worst_a.max(rel(sampled, exact));
        if sampled < exact * (1.0 - 1e-9) {
            below_a += 1;
        }
    }
    let pass_a = worst_a <= 1e-3 && below_a == 0;

    // (b) Grassmann perturbation search
    let mut worst_b = 0.0f64;
    let mut below_b = 0;
    for (shape_index, (m, n)) in [(2usize, 4usize), (3, 5)].into_iter().enumerate() {
        for k in 0..50 {
            let mut rng = stream(62 + shape_index as u64, k as u64);
            let a = well_posed(&mut rng, m, n);
            let w = a.row_space();
            let exact = grassmann_distance(&w).unwrap().distance;
            let found = grassmann_perturbation_search(&w, 256, k as u64)
                .unwrap()
                .value;
            if found < exact - 1e-9 {
                below_b += 1;
            }
            worst_b = worst_b.max(found / exact - 1.0);
        }
    }
    let pass_b = below_b == 0 && worst_b <= 0.05;

    // (c) Renegar perturbation search on normalized / balanced instances
    let mut worst_c = [0.0f64; 2];
    let mut below_c = 0;
    for k in 0..50 {
        let (m, n) = if k % 2 == 0 { (2, 4) } else { (3, 5) };
        let mut rng = stream(64, k as u64);
        let a = well_posed(&mut rng, m, n);
        let cases = [
            (
                Order::NormalizeOnly,
                NormPair::OneTwo,
                1.0 / gcc(&a).unwrap(),
            ),
            (
                Order::BalanceOnly,
                NormPair::TwoTwo,
                1.0 / grassmann_cond(&a).unwrap(),
            ),
        ];
        for (slot, (order, norm, exact)) in cases.into_iter().enumerate() {
            let a_tilde = precondition(&a, order).unwrap().a_hat;
            let found = renegar_perturbation_search(&a_tilde, norm, 32, k as u64)
                .unwrap()
                .value;
            if found < exact * (1.0 - 1e-9) {
                below_c += 1;
            }
            worst_c[slot] = worst_c[slot].max(found / exact - 1.0);
        }
    }
    let pass_c = below_c == 0 && worst_c[0] <= 0.05 && worst_c[1] <= 0.05;

    Outcome::new(
        pass_a && pass_b && pass_c,
        format!(
            "(a) max rel gap {worst_a:.2e}, {below_a} below exact; (b) max excess {:.2}%, {below_b} below exact; (c) max excess 1,2: {:.2}%, 2,2: {:.2}%, {below_c} below exact",
            100.0 * worst_b,
            100.0 * worst_c[0],
            100.0 * worst_c[1]
        ),
    )
}

/// Order-matters witnesses at ε = 0.01.
fn criterion_7() -> Outcome {
    let eps = 0.01;
    let ex1 = run_example(1, eps).unwrap();
    let ratio1 = ex1.row("gcc(A_hat)").unwrap().computed / ex1.row("gcc(A)").unwrap().computed;
    let ex2 = run_example(2, eps).unwrap();
    let ratio2 =
        ex2.row("grassmann(A_hat)").unwrap().computed / ex2.row("grassmann(A)").unwrap().computed;
    let ex3 = run_example(3, eps).unwrap();
    let gcc_a = ex3.row("gcc(A)").unwrap().computed;
    let gcc_hat = ex3.row("gcc(A_hat)").unwrap().computed;
    let normalized = gcc_a * eps / (2.0 + 2.0 * (1.0f64 + eps).powi(2)).sqrt();
    let pass = ratio1 >= 100.0
        && ratio2 >= 100.0
        && (normalized - 1.0).abs() <= 1e-6
        && rel(gcc_hat, 2f64.sqrt()) <= 1e-6;
    Outcome::new(
        pass,
        format!(
            "ex1 ratio {ratio1:.4}; ex2 ratio {ratio2:.4}; ex3 C_GCC(A)*eps/sqrt(2+2(1+eps)^2) = {normalized:.6} (want 1), C_GCC(A_hat) = {gcc_hat:.12}, C_GCC(A)/C_GCC(A_hat) = {:.1}",
            gcc_a / gcc_hat
        ),
    )
}

/// Ill-posed instance: a pair `±u` with `u ⊥ y`, every other column strictly
/// on the positive side of `y`.
fn ill_posed(rng: &mut StreamRng, m: usize, n: usize) -> DMatrix<f64> {
    let y = unit_vector(rng, m);
    let mut u = unit_vector(rng, m);
    u -= &y * y.dot(&u);
    u /= u.norm();
    let mut a = gaussian_matrix(rng, m, n);
    a.set_column(0, &u);
    a.set_column(1, &(-&u));
    for j in 2..n {
        let mut c = a.column(j).clone_owned();
        let along = y.dot(&c);
        c += &y * (along.abs() - along + 0.1 + rng.random::<f64>());
        a.set_column(j, &c);
    }
    a
}

/// Witness substitution on random instances plus constructed ill-posed ones.
fn criterion_8() -> Outcome {
    let shapes = [(2, 3), (2, 4), (3, 6), (4, 8), (5, 10)];
    let (mut primal, mut dual, mut disagreements) = (0, 0, 0);
    for k in 0..500 {
        let (m, n) = shapes[k % shapes.len()];
        let mut rng = stream(8, k as u64);
        let a = well_posed(&mut rng, m, n);
        let status = classify_feasibility(&a).unwrap();
        let ok = match status.tag {
            FeasibilityTag::PrimalStrict => {
                primal += 1;
                let x: &DVector<f64> = &status.witness;
                (a.matrix() * x).norm() <= 1e-8 && x.min() >= 0.0 && x.max() > 0.0
            }
            FeasibilityTag::DualStrict => {
                dual += 1;
                let norms = a.column_norms();
                let aty = a.matrix().transpose() * &status.witness;
                (0..a.n()).all(|i| aty[i] >= status.margin * norms[i] * (1.0 - 1e-6))
            }
            FeasibilityTag::IllPosed => false,
        };
        if !ok {
            disagreements += 1;
        }
    }
    let mut ill_hits = 0;
    for k in 0..20 {
        let (m, n) = [(2, 4), (3, 5), (3, 6), (4, 7)][k % 4];
        let mut rng = stream(88, k as u64);
        let raw = ill_posed(&mut rng, m, n);
        let a = ProblemInstance::new(raw).unwrap();
        if classify_feasibility(&a).unwrap().tag == FeasibilityTag::IllPosed
            && classify_matrix(a.matrix(), ILL_TOL) == FeasibilityTag::IllPosed
        {
            ill_hits += 1;
        }
    }
    Outcome::new(
        disagreements == 0 && primal > 0 && dual > 0 && ill_hits == 20,
        format!("500 random ({primal} primal, {dual} dual): {disagreements} substitution failures; {ill_hits}/20 constructed ill-posed"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 example closed forms", criterion_1),
        ("2 displayed matrices", criterion_2),
        ("3 bound sweeps", criterion_3),
        ("4 bracket collapse", criterion_4),
        ("5 invariances", criterion_5),
        ("6 oracle cross-checks", criterion_6),
        ("7 order matters", criterion_7),
        ("8 feasibility classifier", criterion_8),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Outcome::new(false, "panicked"));
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} [{:.1}s]: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
