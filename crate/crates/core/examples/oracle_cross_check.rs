//! Brute-force searches bounding each exact condition computation from above.
//!
//! `cargo run --release --example oracle_cross_check`

use ineqcond::condition::{gcc, grassmann_distance};
use ineqcond::experiments::{draw_well_posed, Ensemble};
use ineqcond::oracles::{
    gcc_sampling, grassmann_perturbation_search, renegar_perturbation_search, NormPair,
};
use ineqcond::precondition::{precondition, Order};
use ineqcond::rng::stream;
use ineqcond::FeasibilityTag;

fn main() -> ineqcond::Result<()> {
    for k in 0..4 {
        let (a, _) = draw_well_posed(&mut stream(2024, k), 2, 4, Ensemble::Gaussian)?;
        let tag = ineqcond::classify_feasibility(&a)?.tag;
        println!("instance {k} ({})", tag.as_str());

        let exact = gcc(&a)?;
        if tag == FeasibilityTag::DualStrict {
            let s = gcc_sampling(&a, 4096)?;
            println!(
                "  C_GCC {exact:.8}  sphere sampling {:.8}  ({} evaluations)",
                s.value, s.evaluations
            );
        }
        let unit = precondition(&a, Order::NormalizeOnly)?.a_hat;
        let r = renegar_perturbation_search(&unit, NormPair::OneTwo, 16, k)?;
        println!(
            "  1/C_GCC {:.8}  (1,2) perturbation search {:.8}",
            1.0 / exact,
            r.value
        );

        let w = a.row_space();
        let d = grassmann_distance(&w)?.distance;
        let g = grassmann_perturbation_search(&w, 16, k)?;
        println!("  d(W, Σ) {d:.8}  subspace search {:.8}", g.value);
    }
    Ok(())
}
