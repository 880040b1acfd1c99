//! Sweep the relay selection parameter: high values starve blocked flows
//! of candidates, low values stop helping once every good relay passes.
//!
//!     cargo run --example beta_sweep

use std::path::Path;

use backhaul_sim::baselines::SchemeId;
use backhaul_sim::harness::{
    aggregate, run_experiment, write_sweep_outputs, BaseParams, SweepSpec,
};

fn main() -> backhaul_sim::Result<()> {
    let spec = SweepSpec {
        schemes: vec![SchemeId::Raqs],
        blocked_counts: vec![5],
        sigma_values: vec![0.01],
        beta_values: vec![0.9, 0.8, 0.7, 0.6, 0.53, 0.45, 0.38, 0.3],
        repetitions: 20,
        base: BaseParams::default(),
        master_seed: 42,
    };
    let records = run_experiment(&spec)?;
    let (long_path, _) = write_sweep_outputs(&records, Path::new("beta_sweep.csv"))?;
    println!("wrote {}", long_path.display());

    for agg in aggregate(&records) {
        println!(
            "beta {:4}: completed {:5.2} +- {:4.2}, throughput {:6.2} Gbps",
            agg.beta,
            agg.mean_completed,
            agg.stderr_completed,
            agg.mean_throughput_bps / 1e9
        );
    }
    Ok(())
}
