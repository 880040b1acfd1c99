//! Physical scenario: node placement, frame timing, flows and blockage.
//!
//! All generators are pure functions of `(seed, parameters)`. A [`Scenario`]
//! is immutable after construction and can be shared read-only across
//! parallel simulation runs.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Index of a node within a [`Topology`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Flows are indexed densely from zero; the id doubles as a row index.
pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    #[serde(rename = "bs")]
    BaseStation,
    Relay,
}

/// Planar coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub role: NodeRole,
    pub pos: Position,
}

/// The mesh layout: base stations and relays inside a square area.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    area_side: f64,
}

impl Topology {
    /// Node ids must equal their index; at least one base station required.
    pub fn new(nodes: Vec<Node>, area_side: f64) -> Result<Self> {
        if area_side <= 0.0 {
            return Err(Error::InvalidParameter("area_side must be positive".into()));
        }
        if !nodes.iter().any(|n| n.role == NodeRole::BaseStation) {
            return Err(Error::InvalidParameter(
                "topology needs at least one base station".into(),
            ));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id.0 as usize != i {
                return Err(Error::InvalidParameter(format!(
                    "node id {} does not match its index {i}",
                    n.id
                )));
            }
            let inside =
                n.pos.x >= 0.0 && n.pos.x <= area_side && n.pos.y >= 0.0 && n.pos.y <= area_side;
            if !inside {
                return Err(Error::InvalidParameter(format!(
                    "node {} lies outside the {area_side} m square",
                    n.id
                )));
            }
        }
        Ok(Topology { nodes, area_side })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn area_side(&self) -> f64 {
        self.area_side
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0 as usize]
    }

    pub fn position(&self, id: NodeId) -> Position {
        self.nodes[id.0 as usize].pos
    }

    pub fn role(&self, id: NodeId) -> NodeRole {
        self.nodes[id.0 as usize].role
    }

    pub fn base_stations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.role == NodeRole::BaseStation)
            .map(|n| n.id)
    }

    pub fn relays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.role == NodeRole::Relay)
            .map(|n| n.id)
    }

    pub fn num_base_stations(&self) -> usize {
        self.base_stations().count()
    }

    pub fn num_relays(&self) -> usize {
        self.relays().count()
    }

    pub fn distance_between(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.position(a), self.position(b))
    }
}

/// Superframe timing: a scheduling phase followed by `num_slots` equal slots.
///
/// Times are stored in microseconds exactly as they appear in scenario
/// documents, so serialization round-trips bit-for-bit; second-valued
/// accessors are used for all rate arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConfig {
    /// Number of transmission slots K.
    #[serde(rename = "K")]
    pub num_slots: usize,
    /// Slot duration in microseconds.
    pub slot_us: f64,
    /// Scheduling phase duration in microseconds.
    pub sched_us: f64,
}

impl FrameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_slots < 1 {
            return Err(Error::InvalidParameter(
                "frame needs at least one slot".into(),
            ));
        }
        if self.slot_us <= 0.0 {
            return Err(Error::InvalidParameter("slot time must be positive".into()));
        }
        if self.sched_us < 0.0 {
            return Err(Error::InvalidParameter(
                "scheduling phase time cannot be negative".into(),
            ));
        }
        Ok(())
    }

    pub fn slot_time_s(&self) -> f64 {
        self.slot_us * 1e-6
    }

    pub fn sched_time_s(&self) -> f64 {
        self.sched_us * 1e-6
    }

    /// Scheduling phase plus transmission phase, in seconds.
    pub fn superframe_s(&self) -> f64 {
        self.sched_time_s() + self.num_slots as f64 * self.slot_time_s()
    }
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            num_slots: 3000,
            slot_us: 18.0,
            sched_us: 850.0,
        }
    }
}

/// A traffic demand between two base stations with a minimum-throughput
/// requirement. `blocked` means the direct line of sight is obstructed for
/// the whole superframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: FlowId,
    pub src: NodeId,
    pub dst: NodeId,
    pub qos_bps: f64,
    pub blocked: bool,
}

/// Everything one simulation run needs, reproducible from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub flows: Vec<FlowSpec>,
    pub frame: FrameConfig,
    pub channel: ChannelParams,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        self.channel.validate()?;
        let n = self.topology.nodes().len() as u32;
        for f in &self.flows {
            if f.src == f.dst {
                return Err(Error::InvalidParameter(format!(
                    "flow {} has identical endpoints",
                    f.id
                )));
            }
            if f.src.0 >= n || f.dst.0 >= n {
                return Err(Error::InvalidParameter(format!(
                    "flow {} references a missing node",
                    f.id
                )));
            }
            if f.qos_bps <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "flow {} has non-positive QoS",
                    f.id
                )));
            }
        }
        Ok(())
    }

    /// Unordered base-station pairs whose line of sight is obstructed.
    /// An obstacle attenuates all propagation between the pair, both as
    /// signal and as interference path.
    pub fn blocked_pairs(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.flows
            .iter()
            .filter(|f| f.blocked)
            .map(|f| ordered_pair(f.src, f.dst))
            .collect()
    }
}

pub fn ordered_pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Draw `n_bs` base stations uniformly in the square and a
/// Poisson(`relay_lambda`)-distributed number of relays, also uniform.
pub fn generate_topology(
    seed: u64,
    n_bs: usize,
    relay_lambda: f64,
    area_side: f64,
) -> Result<Topology> {
    if n_bs < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 base stations".into(),
        ));
    }
    if relay_lambda < 0.0 {
        return Err(Error::InvalidParameter(
            "relay intensity cannot be negative".into(),
        ));
    }
    if area_side <= 0.0 {
        return Err(Error::InvalidParameter("area_side must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(n_bs);
    for i in 0..n_bs {
        nodes.push(Node {
            id: NodeId(i as u32),
            role: NodeRole::BaseStation,
            pos: uniform_position(&mut rng, area_side),
        });
    }
    let n_relays = if relay_lambda > 0.0 {
        let poisson = Poisson::new(relay_lambda)
            .map_err(|e| Error::InvalidParameter(format!("relay intensity: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };
    for i in 0..n_relays {
        nodes.push(Node {
            id: NodeId((n_bs + i) as u32),
            role: NodeRole::Relay,
            pos: uniform_position(&mut rng, area_side),
        });
    }
    Topology::new(nodes, area_side)
}

fn uniform_position(rng: &mut ChaCha8Rng, side: f64) -> Position {
    Position::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side))
}

/// Draw `n_flows` demands with distinct endpoints, QoS uniform in
/// `qos_range`, and exactly `n_blocked` flows marked blocked.
///
/// Endpoints and QoS values are drawn before the blocked subset, so two
/// calls differing only in `n_blocked` produce the same flows.
pub fn generate_flows(
    seed: u64,
    topology: &Topology,
    n_flows: usize,
    qos_range: (f64, f64),
    n_blocked: usize,
) -> Result<Vec<FlowSpec>> {
    if n_flows < 1 {
        return Err(Error::InvalidParameter("need at least one flow".into()));
    }
    if n_blocked > n_flows {
        return Err(Error::TooManyBlocked {
            requested: n_blocked,
            available: n_flows,
        });
    }
    let (lo, hi) = qos_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidParameter(
            "QoS range must satisfy 0 < lo <= hi".into(),
        ));
    }
    let bs: Vec<NodeId> = topology.base_stations().collect();
    if bs.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 base stations for flows".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = Vec::with_capacity(n_flows);
    for id in 0..n_flows {
        let src = bs[rng.gen_range(0..bs.len())];
        let dst = loop {
            let d = bs[rng.gen_range(0..bs.len())];
            if d != src {
                break d;
            }
        };
        let qos_bps = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        flows.push(FlowSpec {
            id,
            src,
            dst,
            qos_bps,
            blocked: false,
        });
    }
    for idx in sample(&mut rng, n_flows, n_blocked) {
        flows[idx].blocked = true;
    }
    Ok(flows)
}

// --- scenario document -----------------------------------------------------

/// On-disk form of a [`Scenario`]; field names are the document schema.
#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    seed: u64,
    area_side: f64,
    nodes: Vec<NodeEntry>,
    flows: Vec<FlowSpec>,
    frame: FrameConfig,
    channel: ChannelParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeEntry {
    id: NodeId,
    role: NodeRole,
    x: f64,
    y: f64,
}

impl Scenario {
    pub fn to_json(&self) -> Result<String> {
        let doc = ScenarioDoc {
            seed: self.seed,
            area_side: self.topology.area_side(),
            nodes: self
                .topology
                .nodes()
                .iter()
                .map(|n| NodeEntry {
                    id: n.id,
                    role: n.role,
                    x: n.pos.x,
                    y: n.pos.y,
                })
                .collect(),
            flows: self.flows.clone(),
            frame: self.frame,
            channel: self.channel.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;
        let nodes = doc
            .nodes
            .into_iter()
            .map(|e| Node {
                id: e.id,
                role: e.role,
                pos: Position::new(e.x, e.y),
            })
            .collect();
        let scenario = Scenario {
            topology: Topology::new(nodes, doc.area_side)?,
            flows: doc.flows,
            frame: doc.frame,
            channel: doc.channel,
            seed: doc.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_matches_hand_values() {
        assert_eq!(
            distance(Position::new(0.0, 0.0), Position::new(3.0, 4.0)),
            5.0
        );
        assert_eq!(
            distance(Position::new(7.5, -2.0), Position::new(7.5, -2.0)),
            0.0
        );
        let d = distance(Position::new(0.0, 0.0), Position::new(100.0, 100.0));
        assert!((d - 141.4213562373095).abs() < 1e-12);
    }

    #[test]
    fn topology_counts_and_containment() {
        let topo = generate_topology(7, 10, 30.0, 100.0).unwrap();
        assert_eq!(topo.num_base_stations(), 10);
        for n in topo.nodes() {
            assert!(n.pos.x >= 0.0 && n.pos.x <= 100.0);
            assert!(n.pos.y >= 0.0 && n.pos.y <= 100.0);
        }
    }

    #[test]
    fn zero_intensity_yields_no_relays() {
        let topo = generate_topology(3, 2, 0.0, 100.0).unwrap();
        assert_eq!(topo.num_base_stations(), 2);
        assert_eq!(topo.num_relays(), 0);
    }

    #[test]
    fn same_seed_same_topology() {
        let a = generate_topology(42, 10, 30.0, 100.0).unwrap();
        let b = generate_topology(42, 10, 30.0, 100.0).unwrap();
        assert_eq!(a, b);
        let c = generate_topology(43, 10, 30.0, 100.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn relay_count_tracks_intensity() {
        // Sample mean over many seeds should sit close to lambda.
        let lambda = 30.0;
        let n = 10_000;
        let total: usize = (0..n)
            .map(|s| {
                generate_topology(s as u64, 2, lambda, 100.0)
                    .unwrap()
                    .num_relays()
            })
            .sum();
        let mean = total as f64 / n as f64;
        assert!(
            (mean - lambda).abs() < 0.05 * lambda,
            "mean relay count {mean} strays from {lambda}"
        );
    }

    #[test]
    fn flows_respect_bounds_and_blocked_count() {
        let topo = generate_topology(1, 10, 30.0, 100.0).unwrap();
        let flows = generate_flows(5, &topo, 10, (1e9, 3e9), 5).unwrap();
        assert_eq!(flows.len(), 10);
        assert_eq!(flows.iter().filter(|f| f.blocked).count(), 5);
        for f in &flows {
            assert_ne!(f.src, f.dst);
            assert!(f.qos_bps >= 1e9 && f.qos_bps <= 3e9);
            assert_eq!(topo.role(f.src), NodeRole::BaseStation);
            assert_eq!(topo.role(f.dst), NodeRole::BaseStation);
        }
    }

    #[test]
    fn blocked_extremes() {
        let topo = generate_topology(1, 10, 30.0, 100.0).unwrap();
        let none = generate_flows(5, &topo, 10, (1e9, 3e9), 0).unwrap();
        assert!(none.iter().all(|f| !f.blocked));
        let all = generate_flows(5, &topo, 10, (1e9, 3e9), 10).unwrap();
        assert!(all.iter().all(|f| f.blocked));
        assert!(matches!(
            generate_flows(5, &topo, 10, (1e9, 3e9), 11),
            Err(Error::TooManyBlocked { .. })
        ));
    }

    #[test]
    fn blocked_count_does_not_perturb_endpoints() {
        let topo = generate_topology(1, 10, 30.0, 100.0).unwrap();
        let a = generate_flows(9, &topo, 10, (1e9, 3e9), 2).unwrap();
        let b = generate_flows(9, &topo, 10, (1e9, 3e9), 8).unwrap();
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!((fa.src, fa.dst), (fb.src, fb.dst));
            assert_eq!(fa.qos_bps, fb.qos_bps);
        }
    }

    #[test]
    fn scenario_json_roundtrip_is_lossless() {
        for seed in 0..20u64 {
            let topology = generate_topology(seed, 6, 8.0, 100.0).unwrap();
            let flows = generate_flows(seed ^ 0xabcd, &topology, 5, (1e9, 3e9), 2).unwrap();
            let scenario = Scenario {
                topology,
                flows,
                frame: FrameConfig::default(),
                channel: ChannelParams::default(),
                seed,
            };
            let text = scenario.to_json().unwrap();
            let back = Scenario::from_json(&text).unwrap();
            assert_eq!(scenario, back, "roundtrip must preserve every field");
        }
    }
}
