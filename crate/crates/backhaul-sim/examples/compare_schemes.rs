//! All four scheduling schemes on the same scenario, side by side.
//!
//!     cargo run --example compare_schemes

use backhaul_sim::baselines::{run_scheme, SchemeId};
use backhaul_sim::harness::{build_scenario, mix_seed, BaseParams};

fn main() -> backhaul_sim::Result<()> {
    let seed = 42;
    let scenario = build_scenario(&BaseParams::default(), seed, 5)?;
    println!(
        "scenario: {} flows, {} blocked, {} relays available",
        scenario.flows.len(),
        scenario.flows.iter().filter(|f| f.blocked).count(),
        scenario.topology.num_relays()
    );
    println!(
        "{:<14} {:>9} {:>16}",
        "scheme", "completed", "throughput Gbps"
    );
    for scheme in SchemeId::ALL {
        let outcome = run_scheme(scheme, &scenario, 0.01, 0.53, mix_seed(seed, 0x7e1a))?;
        println!(
            "{:<14} {:>9} {:>16.2}",
            scheme.to_string(),
            outcome.metrics.completed_flows,
            outcome.metrics.system_throughput_bps / 1e9
        );
    }
    Ok(())
}
