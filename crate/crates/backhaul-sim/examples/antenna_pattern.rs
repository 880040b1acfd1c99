//! Walk the radio model: antenna gain over the offset angle, received
//! power over distance, noise floor and interference-free link rates.
//!
//!     cargo run --example antenna_pattern

use backhaul_sim::channel::{noise_power, AntennaPattern, ChannelParams, DirectedLink, LinkModel};
use backhaul_sim::model::{Node, NodeId, NodeRole, Position, Topology};

fn main() -> backhaul_sim::Result<()> {
    let params = ChannelParams::default();
    let pattern = AntennaPattern::new(params.beamwidth_deg);
    println!(
        "pattern: G0 {:.2} dB, main lobe {:.0} deg, side lobes {:.2} dB",
        pattern.g0_db, pattern.main_lobe_deg, pattern.side_lobe_db
    );
    for theta in [0.0, 7.5, 15.0, 19.5, 30.0, 39.0, 39.5, 90.0, 180.0] {
        println!(
            "  gain({theta:>5.1} deg) = {:+7.2} dB",
            pattern.gain_db(theta)?
        );
    }

    let n = noise_power(&params);
    println!("noise floor: {:.3e} mW ({:.2} dBm)", n, 10.0 * n.log10());

    // A two-node line topology pushed apart step by step.
    println!("aligned link over distance:");
    for d in [10.0, 25.0, 50.0, 100.0, 141.4] {
        let nodes = vec![
            Node {
                id: NodeId(0),
                role: NodeRole::BaseStation,
                pos: Position::new(0.0, 0.0),
            },
            Node {
                id: NodeId(1),
                role: NodeRole::BaseStation,
                pos: Position::new(d, 0.0),
            },
        ];
        let topology = Topology::new(nodes, 200.0)?;
        let model = LinkModel::new(&params, &topology, Default::default());
        let link = DirectedLink::new(NodeId(0), NodeId(1));
        let p = model.signal_power(link)?;
        let r = model.free_rate(link)?;
        println!(
            "  d {d:>6.1} m: received {:.3e} mW, rate {:6.2} Gbps",
            p,
            r / 1e9
        );
    }
    Ok(())
}
