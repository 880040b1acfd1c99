//! Relay selection for blocked flows: lens-region candidates, time-ratio
//! filtering, best-candidate picking and repeated-relay elimination.
//!
//! A blocked flow may only transmit through a two-hop relay path. Candidate
//! relays are screened in three stages: the lens region around the flow's
//! endpoints (Can1), a time-ratio threshold `beta` (Can2, kept sorted by
//! ratio), and the best surviving relay (Can3). Flows that end up with the
//! same relay are disambiguated so each relay serves at most one flow.

use std::collections::BTreeMap;

use crate::channel::{DirectedLink, LinkModel};
use crate::error::{Error, Result};
use crate::model::{distance, FlowId, FlowSpec, NodeId, NodeRole, Topology};

/// The path a flow is scheduled on. Blocked flows that lose every candidate
/// get `NoPath` and are excluded from scheduling entirely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Backhaul,
    Relay(NodeId),
    NoPath,
}

impl Path {
    pub fn num_hops(&self) -> usize {
        match self {
            Path::Backhaul => 1,
            Path::Relay(_) => 2,
            Path::NoPath => 0,
        }
    }
}

impl std::fmt::Display for Path {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Path::Backhaul => write!(f, "backhaul"),
            Path::Relay(r) => write!(f, "relay:{r}"),
            Path::NoPath => write!(f, "none"),
        }
    }
}

/// Per-flow selected paths, indexed by flow id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAssignment {
    paths: Vec<Path>,
}

impl PathAssignment {
    pub fn new(paths: Vec<Path>) -> Self {
        PathAssignment { paths }
    }

    pub fn get(&self, flow: FlowId) -> Path {
        self.paths[flow]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (FlowId, Path)> + '_ {
        self.paths.iter().copied().enumerate()
    }

    /// The directed hop links each flow is scheduled on, in path order.
    pub fn hop_links(&self, flows: &[FlowSpec]) -> Vec<Vec<DirectedLink>> {
        flows
            .iter()
            .map(|f| match self.paths[f.id] {
                Path::Backhaul => vec![DirectedLink::new(f.src, f.dst)],
                Path::Relay(r) => vec![DirectedLink::new(f.src, r), DirectedLink::new(r, f.dst)],
                Path::NoPath => vec![],
            })
            .collect()
    }
}

/// Candidate relays of one blocked flow. `can2` is sorted by descending
/// time ratio, ties broken by ascending relay id.
#[derive(Debug, Clone, Default)]
pub struct FlowCandidates {
    pub can1: Vec<NodeId>,
    pub can2: Vec<(NodeId, f64)>,
    pub can3: Option<NodeId>,
}

/// Candidate sets for every blocked flow.
#[derive(Debug, Clone, Default)]
pub struct CandidateSets {
    pub per_flow: BTreeMap<FlowId, FlowCandidates>,
}

/// Relays strictly inside both disks of radius `d(src, dst)` centered on the
/// flow's endpoints. Borders are excluded, as are relays coincident with an
/// endpoint (their hop would have zero length).
pub fn lens_candidates(topology: &Topology, flow: &FlowSpec) -> Vec<NodeId> {
    let src = topology.position(flow.src);
    let dst = topology.position(flow.dst);
    let d = distance(src, dst);
    topology
        .relays()
        .filter(|&r| {
            let p = topology.position(r);
            let d1 = distance(src, p);
            let d2 = distance(p, dst);
            d1 > 0.0 && d2 > 0.0 && d1 < d && d2 < d
        })
        .collect()
}

/// Time ratio of the backhaul path over the two-hop relay path:
/// `(1/R_b) / (1/R_1 + 1/R_2)` with all rates interference-free and the
/// backhaul rated as if unobstructed.
pub fn time_ratio(model: &LinkModel<'_>, flow: &FlowSpec, relay: NodeId) -> Result<f64> {
    debug_assert_eq!(model.topology.role(relay), NodeRole::Relay);
    let r_b = model.free_rate_unblocked(flow.src, flow.dst)?;
    let r_1 = model.free_rate_unblocked(flow.src, relay)?;
    let r_2 = model.free_rate_unblocked(relay, flow.dst)?;
    if r_b <= 0.0 || r_1 <= 0.0 || r_2 <= 0.0 {
        return Err(Error::ZeroRate {
            flow: flow.id,
            relay: relay.0,
        });
    }
    Ok((1.0 / r_b) / (1.0 / r_1 + 1.0 / r_2))
}

/// Build Can1, Can2 and Can3 for every blocked flow.
pub fn build_candidates(
    model: &LinkModel<'_>,
    flows: &[FlowSpec],
    beta: f64,
) -> Result<CandidateSets> {
    if beta <= 0.0 {
        return Err(Error::InvalidParameter("beta must be positive".into()));
    }
    let mut per_flow = BTreeMap::new();
    for flow in flows.iter().filter(|f| f.blocked) {
        let can1 = lens_candidates(model.topology, flow);
        let mut can2 = Vec::new();
        for &r in &can1 {
            let tr = time_ratio(model, flow, r)?;
            if tr > beta {
                can2.push((r, tr));
            }
        }
        can2.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let can3 = can2.first().map(|&(r, _)| r);
        per_flow.insert(flow.id, FlowCandidates { can1, can2, can3 });
    }
    Ok(CandidateSets { per_flow })
}

/// Resolve relays claimed by several flows so the final assignment maps
/// distinct flows to distinct relays.
///
/// Contested relays are processed in ascending relay id (then flow id)
/// order. For each contested pair: if both flows are down to a single
/// candidate, the higher time ratio keeps the relay and the other flow
/// drops out; otherwise the flow that needs it more (single candidate, or
/// higher ratio) keeps it and the loser removes the relay and falls back to
/// its next-best candidate, which may in turn collide and is resolved the
/// same way. Each round strictly shrinks some candidate set, so the loop
/// terminates.
pub fn eliminate_repeats(candidates: &CandidateSets, flows: &[FlowSpec]) -> PathAssignment {
    let mut can2: BTreeMap<FlowId, Vec<(NodeId, f64)>> = candidates
        .per_flow
        .iter()
        .map(|(&f, c)| (f, c.can2.clone()))
        .collect();
    let mut paths = vec![Path::Backhaul; flows.len()];
    for flow in flows {
        if flow.blocked {
            paths[flow.id] = match candidates.per_flow[&flow.id].can3 {
                Some(r) => Path::Relay(r),
                None => Path::NoPath,
            };
        }
    }

    while let Some((f1, f2, relay)) = first_contested_pair(&paths) {
        let tr = |f: FlowId| {
            can2[&f]
                .iter()
                .find(|&&(r, _)| r == relay)
                .map(|&(_, t)| t)
                .unwrap_or(0.0)
        };
        let n1 = can2[&f1].len();
        let n2 = can2[&f2].len();
        // Higher time ratio needs the relay more; ties go to the lower id.
        let f1_wins_tr = tr(f1) >= tr(f2);
        let (winner, loser) = if n1 == 1 && n2 == 1 {
            if f1_wins_tr {
                (f1, f2)
            } else {
                (f2, f1)
            }
        } else if n1 == 1 {
            (f1, f2)
        } else if n2 == 1 {
            (f2, f1)
        } else if f1_wins_tr {
            (f1, f2)
        } else {
            (f2, f1)
        };
        paths[winner] = Path::Relay(relay);
        let set = can2.get_mut(&loser).unwrap();
        set.retain(|&(r, _)| r != relay);
        paths[loser] = match set.first() {
            Some(&(r, _)) => Path::Relay(r),
            None => Path::NoPath,
        };
    }
    PathAssignment::new(paths)
}

/// Lowest-id relay currently assigned to more than one flow, with its two
/// lowest-id claimants.
fn first_contested_pair(paths: &[Path]) -> Option<(FlowId, FlowId, NodeId)> {
    let mut by_relay: BTreeMap<NodeId, Vec<FlowId>> = BTreeMap::new();
    for (f, p) in paths.iter().enumerate() {
        if let Path::Relay(r) = p {
            by_relay.entry(*r).or_default().push(f);
        }
    }
    by_relay
        .into_iter()
        .find(|(_, fs)| fs.len() > 1)
        .map(|(r, fs)| (fs[0], fs[1], r))
}

/// Full selection pipeline: unblocked flows keep the backhaul, blocked
/// flows get lens plus time-ratio screened relays with repeats eliminated.
pub fn select_paths(
    model: &LinkModel<'_>,
    flows: &[FlowSpec],
    beta: f64,
) -> Result<PathAssignment> {
    let candidates = build_candidates(model, flows, beta)?;
    Ok(eliminate_repeats(&candidates, flows))
}
