//! Relay selection for the blocked flows of one scenario: lens-region
//! candidates, the time-ratio filter, and the final non-repeating
//! assignment.
//!
//!     cargo run --example relay_selection

use backhaul_sim::channel::LinkModel;
use backhaul_sim::harness::{build_scenario, BaseParams};
use backhaul_sim::relay::{build_candidates, eliminate_repeats};

fn main() -> backhaul_sim::Result<()> {
    let beta = 0.53;
    let scenario = build_scenario(&BaseParams::default(), 7, 5)?;
    let model = LinkModel::for_scenario(&scenario);
    let candidates = build_candidates(&model, &scenario.flows, beta)?;

    for (flow, c) in &candidates.per_flow {
        let f = &scenario.flows[*flow];
        println!(
            "flow {flow} ({} -> {}, {:.2} Gbps): {} in lens, {} past beta {beta}",
            f.src,
            f.dst,
            f.qos_bps / 1e9,
            c.can1.len(),
            c.can2.len()
        );
        for (relay, tr) in c.can2.iter().take(3) {
            println!("    relay {relay}: time ratio {tr:.4}");
        }
        if let Some(best) = c.can3 {
            println!("    best candidate: relay {best}");
        }
    }

    let paths = eliminate_repeats(&candidates, &scenario.flows);
    println!("final assignment:");
    for (flow, path) in paths.iter() {
        println!("  flow {flow}: {path}");
    }
    Ok(())
}
