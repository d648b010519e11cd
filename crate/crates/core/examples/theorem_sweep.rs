//! Random sweep checking the two-sided bounds relating preconditioned condition
//! numbers, with a summary of the tightest slack.
//!
//! `cargo run --release --example theorem_sweep [-- m n trials seed]`

use ineqcond::experiments::{run_sweep, SweepConfig};

fn main() -> ineqcond::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("integer"))
        .collect();
    let get = |i: usize, default: u64| args.get(i).copied().unwrap_or(default);
    let config = SweepConfig::new(
        get(0, 3) as usize,
        get(1, 6) as usize,
        get(2, 200) as usize,
        get(3, 42),
    );
    let report = run_sweep(&config)?;

    println!(
        "{}x{} gaussian, {} trials, seed {}: {} violations, {} redraws, min relative slack {:.4}",
        config.m,
        config.n,
        config.trials,
        config.seed,
        report.violations(),
        report.redraws(),
        report.min_slack()
    );
    let json = report.to_json();
    println!("{}", serde_json::to_string_pretty(&json["quantiles"])?);
    Ok(())
}
