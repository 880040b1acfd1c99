//! Monte Carlo sweep over the number of blocked flows for all schemes,
//! writing long-format and aggregated CSV files.
//!
//!     cargo run --example blocked_sweep
//!
//! Uses 20 repetitions to stay quick; raise `REPS` for smoother curves.

use std::path::Path;

use backhaul_sim::baselines::SchemeId;
use backhaul_sim::harness::{
    aggregate, run_experiment, write_sweep_outputs, BaseParams, SweepSpec,
};

const REPS: usize = 20;

fn main() -> backhaul_sim::Result<()> {
    let spec = SweepSpec {
        schemes: SchemeId::ALL.to_vec(),
        blocked_counts: (0..=10).collect(),
        sigma_values: vec![0.01],
        beta_values: vec![0.53],
        repetitions: REPS,
        base: BaseParams::default(),
        master_seed: 42,
    };
    let records = run_experiment(&spec)?;
    let (long_path, agg_path) = write_sweep_outputs(&records, Path::new("blocked_sweep.csv"))?;
    println!("wrote {} and {}", long_path.display(), agg_path.display());

    for agg in aggregate(&records) {
        println!(
            "{:<14} blocked {:2}: completed {:5.2} +- {:4.2}, throughput {:6.2} Gbps",
            agg.scheme.to_string(),
            agg.blocked,
            agg.mean_completed,
            agg.stderr_completed,
            agg.mean_throughput_bps / 1e9
        );
    }
    Ok(())
}
