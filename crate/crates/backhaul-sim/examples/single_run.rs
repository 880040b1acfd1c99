//! One full scheduling run: relay selection, the slot loop, per-flow
//! progress and the schedule's first rebuild events.
//!
//!     cargo run --example single_run

use backhaul_sim::channel::LinkModel;
use backhaul_sim::harness::{build_scenario, BaseParams};
use backhaul_sim::relay::select_paths;
use backhaul_sim::scheduler::{run_schedule_with, ScheduleOptions, SelectionPolicy, SlotState};

fn main() -> backhaul_sim::Result<()> {
    let scenario = build_scenario(&BaseParams::default(), 3, 5)?;
    let model = LinkModel::for_scenario(&scenario);
    let paths = select_paths(&model, &scenario.flows, 0.53)?;
    let outcome = run_schedule_with(
        &scenario,
        &paths,
        0.01,
        ScheduleOptions {
            policy: SelectionPolicy::TwoHopFirst,
            record_rebuilds: true,
        },
    )?;

    println!("per-flow outcome:");
    for p in &outcome.progress {
        let slots_active = (0..scenario.frame.num_slots)
            .filter(|&s| matches!(outcome.matrix.state(p.flow, s), SlotState::Active { .. }))
            .count();
        println!(
            "  flow {} [{}] plan {:?} active {slots_active} slots delivered {:5.2} Gbps needed {:.2} Gbps {}",
            p.flow,
            p.path,
            p.xi,
            p.delivered_bps() / 1e9,
            scenario.flows[p.flow].qos_bps / 1e9,
            if p.completed { "done" } else if p.removed { "removed" } else { "unfinished" },
        );
    }
    println!(
        "completed {} of {}, system throughput {:.2} Gbps",
        outcome.metrics.completed_flows,
        scenario.flows.len(),
        outcome.metrics.system_throughput_bps / 1e9
    );

    println!("first rebuilds:");
    for trace in outcome.rebuilds.iter().take(5) {
        println!(
            "  slot {:4}: {} vertices, {} edges, invalid {:?}, selected {:?}",
            trace.slot,
            trace.vertices.len(),
            trace.edges.len(),
            trace.invalid,
            trace.selected
        );
    }
    Ok(())
}
