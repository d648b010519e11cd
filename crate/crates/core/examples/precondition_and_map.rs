//! The four preconditioning orders, their certificates `Â = P·A·S`, and mapping
//! solutions of the preconditioned systems back to the original one.

use ineqcond::condition::{classify_feasibility, gcc, grassmann_cond};
use ineqcond::precondition::{map_dual_solution, map_primal_solution, precondition, Order};
use ineqcond::{FeasibilityTag, ProblemInstance};

fn main() -> ineqcond::Result<()> {
    let instances = [
        (
            "dual-feasible",
            ProblemInstance::from_rows(&[vec![20.0, 1.0, 1.0], vec![0.0, -1.0, 1.0]])?,
        ),
        (
            "primal-feasible",
            ProblemInstance::from_rows(&[vec![3.0, -1.0, 0.5], vec![1.0, 2.0, -4.0]])?,
        ),
    ];
    for (label, a) in &instances {
        println!(
            "== {label} instance: C_GCC = {:.6}, C_Gr = {:.6}",
            gcc(a)?,
            grassmann_cond(a)?
        );
        for order in Order::ALL {
            let record = precondition(a, order)?;
            let hat = &record.a_hat;
            let status = classify_feasibility(hat)?;
            let mapped = match status.tag {
                FeasibilityTag::PrimalStrict => {
                    let x = map_primal_solution(&record, &status.witness)?;
                    format!(
                        "x = S·x̂ gives |Ax| = {:.1e}, min x = {:.3}",
                        (a.matrix() * &x).norm(),
                        x.min()
                    )
                }
                _ => {
                    let y = map_dual_solution(&record, &status.witness)?;
                    format!(
                        "y = Pᵀ·ŷ gives min Aᵀy = {:.4}",
                        (a.matrix().transpose() * &y).min()
                    )
                }
            };
            println!(
                "{:>3}: C_GCC(Â) = {:>9.6}  C_Gr(Â) = {:>9.6}  |Â - PAS| = {:.1e}  {mapped}",
                order.short(),
                gcc(hat)?,
                grassmann_cond(hat)?,
                record.reconstruction_error(a),
            );
        }
    }
    Ok(())
}
