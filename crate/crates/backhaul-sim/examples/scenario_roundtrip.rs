//! Generate a scenario from a seed, serialize it to JSON, reload it and
//! confirm the round trip is lossless.
//!
//!     cargo run --example scenario_roundtrip

use backhaul_sim::harness::{build_scenario, BaseParams};
use backhaul_sim::model::Scenario;

fn main() -> backhaul_sim::Result<()> {
    let base = BaseParams::default();
    let scenario = build_scenario(&base, 42, 3)?;
    println!(
        "generated: {} base stations, {} relays, {} flows ({} blocked)",
        scenario.topology.num_base_stations(),
        scenario.topology.num_relays(),
        scenario.flows.len(),
        scenario.flows.iter().filter(|f| f.blocked).count()
    );

    let text = scenario.to_json()?;
    let reloaded = Scenario::from_json(&text)?;
    assert_eq!(scenario, reloaded, "round trip must preserve every field");
    println!("round trip OK ({} bytes of JSON)", text.len());

    // The first lines of the document, for a feel of the schema.
    for line in text.lines().take(12) {
        println!("  {line}");
    }
    println!("  ...");
    Ok(())
}
