//! The four parametric example families: computed values next to their closed forms.
//!
//! `cargo run --example worked_examples [-- eps ...]`

use ineqcond::experiments::run_example;

fn main() -> ineqcond::Result<()> {
    let eps: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("epsilon"))
        .collect();
    let eps = if eps.is_empty() { vec![0.1, 0.01] } else { eps };
    for &e in &eps {
        for id in 1..=4 {
            match run_example(id, e) {
                Ok(table) => print!("{table}"),
                Err(err) => println!("example {id} at eps = {e}: {err}"),
            }
        }
    }
    Ok(())
}
