//! Print a slice of the raw schedule matrix: one row per slot, one column
//! per flow, `0` idle, `-1` done, `1:h` active on hop h.
//!
//!     cargo run --example dump_schedule

use backhaul_sim::baselines::{run_scheme, SchemeId};
use backhaul_sim::harness::{build_scenario, BaseParams};

fn main() -> backhaul_sim::Result<()> {
    let scenario = build_scenario(&BaseParams::default(), 5, 4)?;
    let outcome = run_scheme(SchemeId::Raqs, &scenario, 0.01, 0.53, 99)?;
    for (f, path) in outcome.paths.iter() {
        println!("# flow {f}: {path}");
    }
    let rows = outcome.matrix.dump_rows();
    println!(
        "# slot,{}",
        (0..scenario.flows.len())
            .map(|f| format!("f{f}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    // The interesting part is where hops hand over; sample around changes.
    let mut last = String::new();
    for (slot, row) in rows.iter().enumerate() {
        if *row != last {
            println!("{slot},{row}");
            last = row.clone();
        }
    }
    println!(
        "# completed {} flows, {:.2} Gbps",
        outcome.metrics.completed_flows,
        outcome.metrics.system_throughput_bps / 1e9
    );
    Ok(())
}
