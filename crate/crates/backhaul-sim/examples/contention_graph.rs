//! The contention graph over first hops at several interference
//! thresholds: edges appear as sigma drops.
//!
//!     cargo run --example contention_graph

use backhaul_sim::channel::{LinkBudget, LinkModel};
use backhaul_sim::contention::build_graph;
use backhaul_sim::harness::{build_scenario, BaseParams};
use backhaul_sim::relay::select_paths;

fn main() -> backhaul_sim::Result<()> {
    let scenario = build_scenario(&BaseParams::default(), 11, 4)?;
    let model = LinkModel::for_scenario(&scenario);
    let paths = select_paths(&model, &scenario.flows, 0.53)?;
    let budget = LinkBudget::build(&model, &paths.hop_links(&scenario.flows))?;

    let hops: Vec<(usize, usize)> = scenario
        .flows
        .iter()
        .filter(|f| !budget.hops(f.id).is_empty())
        .map(|f| (f.id, 0))
        .collect();
    println!(
        "{} scheduled flows, max pairwise interference {:.3e} mW",
        hops.len(),
        budget.max_pairwise_interference()
    );

    for sigma in [1e-4, 1e-2, 1.0, 1e2] {
        let graph = build_graph(&budget, &hops, sigma);
        let degrees: Vec<String> = graph
            .vertices()
            .map(|v| format!("{v}:{}", graph.degree(v).unwrap()))
            .collect();
        println!(
            "sigma {sigma:8.4} mW: {} edges {:?}",
            graph.edges().len(),
            graph.edges()
        );
        println!("    degrees {}", degrees.join(" "));
    }
    Ok(())
}
