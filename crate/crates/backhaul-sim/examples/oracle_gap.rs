//! Compare the slot scheduler against the exhaustive solver on random
//! tiny instances and summarize the optimality gap.
//!
//!     cargo run --example oracle_gap

use backhaul_sim::oracle::run_gap_study;

fn main() -> backhaul_sim::Result<()> {
    let summary = run_gap_study(0x5eed, 100, 0.01, 0.53)?;
    println!("seed,flows,slots,oracle,heuristic,gap");
    for r in summary.records.iter().filter(|r| r.gap() != 0) {
        println!(
            "{},{},{},{},{},{}",
            r.seed,
            r.flows,
            r.slots,
            r.oracle_completed,
            r.heuristic_completed,
            r.gap()
        );
    }
    println!(
        "{} instances: mean gap {:.3} flows, max gap {}, dominance violations {}",
        summary.records.len(),
        summary.mean_gap,
        summary.max_gap,
        summary.dominance_violations
    );
    Ok(())
}
