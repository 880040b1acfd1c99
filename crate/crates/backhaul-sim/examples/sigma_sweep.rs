//! Sweep the contention threshold over its log grid at five blocked flows
//! and watch completion rise, fall and flatten.
//!
//!     cargo run --example sigma_sweep

use std::path::Path;

use backhaul_sim::baselines::SchemeId;
use backhaul_sim::harness::{
    aggregate, default_sigma_grid, run_experiment, write_sweep_outputs, BaseParams, SweepSpec,
};

fn main() -> backhaul_sim::Result<()> {
    let spec = SweepSpec {
        schemes: vec![SchemeId::Raqs, SchemeId::RandomRelay],
        blocked_counts: vec![5],
        sigma_values: default_sigma_grid(),
        beta_values: vec![0.53],
        repetitions: 20,
        base: BaseParams::default(),
        master_seed: 42,
    };
    let records = run_experiment(&spec)?;
    let (long_path, _) = write_sweep_outputs(&records, Path::new("sigma_sweep.csv"))?;
    println!("wrote {}", long_path.display());

    for agg in aggregate(&records) {
        println!(
            "{:<14} sigma {:9.4} mW: completed {:5.2} +- {:4.2}",
            agg.scheme.to_string(),
            agg.sigma,
            agg.mean_completed,
            agg.stderr_completed
        );
    }
    Ok(())
}
