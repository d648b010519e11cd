//! Full condition report for one instance.
//!
//! `cargo run --example analyze_instance [-- path/to/matrix.csv|json]`
//! Without an argument a small built-in matrix is analyzed.

use std::path::Path;

use ineqcond::condition::witness_residuals;
use ineqcond::model::read_matrix;
use ineqcond::{ConditionReport, ProblemInstance};

fn main() -> ineqcond::Result<()> {
    let a = match std::env::args().nth(1) {
        Some(path) => ProblemInstance::new(read_matrix(Path::new(&path), None)?)?,
        None => ProblemInstance::from_rows(&[vec![20.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]])?,
    };
    println!("A = {}", a.matrix());

    let report = ConditionReport::compute(&a)?;
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);

    let (first, second) = witness_residuals(&a, &report.feasibility);
    match report.feasibility.tag {
        ineqcond::FeasibilityTag::PrimalStrict => {
            println!("primal witness x: |Ax| = {first:.2e}, min x = {second:.3e}")
        }
        ineqcond::FeasibilityTag::DualStrict => {
            println!("dual witness y: min a_i.y/|a_i| = {first:.6}, |y| = {second:.3}")
        }
        ineqcond::FeasibilityTag::IllPosed => println!("ill-posed: both systems are feasible"),
    }
    Ok(())
}
