//! Slot-by-slot concurrent transmission scheduling with QoS tracking.
//!
//! The schedule is decided per slot. A contention graph over the current
//! hops is rebuilt on the first slot and whenever some hop newly met its
//! QoS target; between rebuilds the previous slot's decision is copied.
//! Flows selected at a rebuild stay active (ongoing) until their current
//! hop completes, and their graph neighbors are not eligible.
//!
//! Hop indices are zero-based throughout; a relay path has hops 0 and 1,
//! a backhaul path only hop 0. Dumps and reports print them one-based.

use std::collections::BTreeSet;

use crate::channel::{shannon_rate, LinkBudget, LinkModel};
use crate::contention::{build_graph, ContentionGraph};
use crate::error::{Error, Result};
use crate::model::{FlowId, FlowSpec, FrameConfig, Scenario};
use crate::relay::{Path, PathAssignment};

/// Per-flow per-slot state. A flow is `Active` while transmitting a hop,
/// `Done` strictly after the slot in which it met its QoS requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Idle,
    Active { hop: usize },
    Done,
}

/// F x K matrix of slot states.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleMatrix {
    states: Vec<Vec<SlotState>>,
    num_slots: usize,
}

impl ScheduleMatrix {
    pub fn new(num_flows: usize, num_slots: usize) -> Self {
        ScheduleMatrix {
            states: vec![vec![SlotState::Idle; num_slots]; num_flows],
            num_slots,
        }
    }

    pub fn num_flows(&self) -> usize {
        self.states.len()
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn state(&self, flow: FlowId, slot: usize) -> SlotState {
        self.states[flow][slot]
    }

    pub fn set(&mut self, flow: FlowId, slot: usize, state: SlotState) {
        self.states[flow][slot] = state;
    }

    /// Hops transmitting in `slot`.
    pub fn active_hops(&self, slot: usize) -> Vec<(FlowId, usize)> {
        self.states
            .iter()
            .enumerate()
            .filter_map(|(f, row)| match row[slot] {
                SlotState::Active { hop } => Some((f, hop)),
                _ => None,
            })
            .collect()
    }

    /// One text row per slot: cells are `0` (idle), `-1` (done) or
    /// `1:h` with the one-based hop tag.
    pub fn dump_rows(&self) -> Vec<String> {
        (0..self.num_slots)
            .map(|slot| {
                let cells: Vec<String> = self
                    .states
                    .iter()
                    .map(|row| match row[slot] {
                        SlotState::Idle => "0".to_string(),
                        SlotState::Done => "-1".to_string(),
                        SlotState::Active { hop } => format!("1:{}", hop + 1),
                    })
                    .collect();
                cells.join(",")
            })
            .collect()
    }
}

/// Planning estimate of the slots a hop needs to meet `qos_bps` at its
/// interference-free rate. Returns `u64::MAX` when the rate is zero.
pub fn slots_needed(qos_bps: f64, rate_bps: f64, frame: &FrameConfig) -> u64 {
    if rate_bps <= 0.0 {
        return u64::MAX;
    }
    let bits_needed = qos_bps * frame.superframe_s();
    let bits_per_slot = rate_bps * frame.slot_time_s();
    let xi = (bits_needed / bits_per_slot).ceil();
    if !xi.is_finite() || xi >= u64::MAX as f64 {
        u64::MAX
    } else {
        (xi as u64).max(1)
    }
}

/// QoS progress of one flow after a run.
#[derive(Debug, Clone)]
pub struct FlowProgress {
    pub flow: FlowId,
    pub path: Path,
    /// Slots planned per hop (empty for flows without a path).
    pub xi: Vec<u64>,
    /// True when the flow was excluded up front: no path, or the plan
    /// exceeds the slot budget.
    pub removed: bool,
    /// Bits delivered per hop.
    pub bits: Vec<f64>,
    /// Cumulative throughput per hop over the whole superframe.
    pub throughput_bps: Vec<f64>,
    /// Zero-based index of the unscheduled headmost hop.
    pub current_hop: usize,
    pub completed: bool,
}

impl FlowProgress {
    /// Throughput delivered to the destination: the last hop of the path.
    pub fn delivered_bps(&self) -> f64 {
        self.throughput_bps.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMetrics {
    pub flow: FlowId,
    pub delivered_bps: f64,
    pub completed: bool,
}

/// Run-level evaluation metrics; uncompleted flows contribute their partial
/// destination throughput.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub completed_flows: usize,
    pub system_throughput_bps: f64,
    pub per_flow: Vec<FlowMetrics>,
}

impl MetricsReport {
    pub fn from_progress(progress: &[FlowProgress]) -> Self {
        let per_flow: Vec<FlowMetrics> = progress
            .iter()
            .map(|p| FlowMetrics {
                flow: p.flow,
                delivered_bps: p.delivered_bps(),
                completed: p.completed,
            })
            .collect();
        MetricsReport {
            completed_flows: per_flow.iter().filter(|m| m.completed).count(),
            system_throughput_bps: per_flow.iter().map(|m| m.delivered_bps).sum(),
            per_flow,
        }
    }
}

/// Priority used when picking vertices out of the contention graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Prefer flows on their second hop, then minimum degree, then fewest
    /// planned slots for the current hop, then lowest id.
    TwoHopFirst,
    /// Fewest planned slots first, then minimum degree, then lowest id.
    FewestSlotsFirst,
}

#[derive(Debug, Clone, Copy)]
pub struct ScheduleOptions {
    pub policy: SelectionPolicy,
    /// Record a [`RebuildTrace`] per contention-graph rebuild.
    pub record_rebuilds: bool,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            policy: SelectionPolicy::TwoHopFirst,
            record_rebuilds: false,
        }
    }
}

/// Snapshot of one contention-graph rebuild.
#[derive(Debug, Clone)]
pub struct RebuildTrace {
    pub slot: usize,
    pub vertices: Vec<FlowId>,
    pub edges: Vec<(FlowId, FlowId)>,
    /// Ongoing flows and their neighbors, not eligible for selection.
    pub invalid: Vec<FlowId>,
    pub selected: Vec<FlowId>,
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub matrix: ScheduleMatrix,
    pub progress: Vec<FlowProgress>,
    pub metrics: MetricsReport,
    pub paths: PathAssignment,
    pub rebuilds: Vec<RebuildTrace>,
}

struct FlowRun {
    qos_bps: f64,
    num_hops: usize,
    xi: Vec<u64>,
    scheduled: bool,
    bits: Vec<f64>,
    hop: usize,
    done: bool,
}

/// Schedule with the default two-hop-first policy.
pub fn run_schedule(
    scenario: &Scenario,
    paths: &PathAssignment,
    sigma: f64,
) -> Result<ScheduleOutcome> {
    run_schedule_with(scenario, paths, sigma, ScheduleOptions::default())
}

/// Full scheduling loop over one superframe.
pub fn run_schedule_with(
    scenario: &Scenario,
    paths: &PathAssignment,
    sigma: f64,
    options: ScheduleOptions,
) -> Result<ScheduleOutcome> {
    scenario.validate()?;
    if paths.len() != scenario.flows.len() {
        return Err(Error::InvalidParameter(
            "path assignment does not cover every flow".into(),
        ));
    }
    let frame = scenario.frame;
    let num_flows = scenario.flows.len();
    let num_slots = frame.num_slots;
    let model = LinkModel::for_scenario(scenario);
    let hop_links = paths.hop_links(&scenario.flows);
    let budget = LinkBudget::build(&model, &hop_links)?;

    // Plan slot counts and drop flows whose plan cannot fit.
    let mut runs: Vec<FlowRun> = scenario
        .flows
        .iter()
        .map(|flow| {
            let hops = budget.hops(flow.id);
            let xi: Vec<u64> = hops
                .iter()
                .map(|h| slots_needed(flow.qos_bps, h.rate_free_bps, &frame))
                .collect();
            let total = xi.iter().fold(0u64, |a, &b| a.saturating_add(b));
            let scheduled = !hops.is_empty() && total <= num_slots as u64;
            FlowRun {
                qos_bps: flow.qos_bps,
                num_hops: hops.len(),
                xi,
                scheduled,
                bits: vec![0.0; hops.len()],
                hop: 0,
                done: false,
            }
        })
        .collect();

    let mut matrix = ScheduleMatrix::new(num_flows, num_slots);
    let mut rebuilds = Vec::new();
    // active[f] holds the hop flow f transmits in the current slot.
    let mut active: Vec<Option<usize>> = vec![None; num_flows];
    let mut rebuild = true;
    let slot_s = frame.slot_time_s();
    let superframe_s = frame.superframe_s();

    for slot in 0..num_slots {
        if rebuild {
            rebuild = false;
            let ongoing: Vec<FlowId> = (0..num_flows).filter(|&f| active[f].is_some()).collect();
            let alive: Vec<(FlowId, usize)> = runs
                .iter()
                .enumerate()
                .filter(|(_, r)| r.scheduled && !r.done)
                .map(|(f, r)| (f, r.hop))
                .collect();
            let mut graph = build_graph(&budget, &alive, sigma);
            let mut invalid: BTreeSet<FlowId> = ongoing.iter().copied().collect();
            for &f in &ongoing {
                if let Some(ns) = graph.neighbors(f) {
                    invalid.extend(ns.iter().copied());
                }
            }
            let full_edges = options.record_rebuilds.then(|| graph.edges());
            for &f in &invalid {
                if graph.contains(f) {
                    graph.remove_vertex(f)?;
                }
            }
            let mut selected = Vec::new();
            while let Some(f) = select_next(&graph, &runs, options.policy) {
                selected.push(f);
                graph.remove_closed_neighborhood(f)?;
            }
            if let Some(edges) = full_edges {
                rebuilds.push(RebuildTrace {
                    slot,
                    vertices: alive.iter().map(|&(f, _)| f).collect(),
                    edges,
                    invalid: invalid.into_iter().collect(),
                    selected: selected.clone(),
                });
            }
            for f in selected {
                active[f] = Some(runs[f].hop);
            }
        }

        let act_list: Vec<(FlowId, usize)> = active
            .iter()
            .enumerate()
            .filter_map(|(f, h)| h.map(|h| (f, h)))
            .collect();
        for &(f, h) in &act_list {
            let rate = budget.rate_with(f, h, &act_list);
            runs[f].bits[h] += rate * slot_s;
            matrix.set(f, slot, SlotState::Active { hop: h });
        }

        // A hop meeting its target throughput triggers a rebuild next slot.
        for &(f, h) in &act_list {
            let run = &mut runs[f];
            if run.bits[h] / superframe_s >= run.qos_bps {
                rebuild = true;
                active[f] = None;
                if h + 1 == run.num_hops {
                    run.done = true;
                    for s in slot + 1..num_slots {
                        matrix.set(f, s, SlotState::Done);
                    }
                } else {
                    run.hop += 1;
                }
            }
        }
    }

    let progress: Vec<FlowProgress> = runs
        .iter()
        .enumerate()
        .map(|(f, r)| FlowProgress {
            flow: f,
            path: paths.get(f),
            xi: r.xi.clone(),
            removed: !r.scheduled,
            bits: r.bits.clone(),
            throughput_bps: r.bits.iter().map(|b| b / superframe_s).collect(),
            current_hop: r.hop,
            completed: r.done,
        })
        .collect();
    let metrics = MetricsReport::from_progress(&progress);
    Ok(ScheduleOutcome {
        matrix,
        progress,
        metrics,
        paths: paths.clone(),
        rebuilds,
    })
}

fn select_next(
    graph: &ContentionGraph,
    runs: &[FlowRun],
    policy: SelectionPolicy,
) -> Option<FlowId> {
    if graph.is_empty() {
        return None;
    }
    let xi_now = |f: FlowId| runs[f].xi[runs[f].hop];
    match policy {
        SelectionPolicy::TwoHopFirst => {
            let second: Vec<FlowId> = graph.vertices().filter(|&f| runs[f].hop == 1).collect();
            let pool: Vec<FlowId> = if second.is_empty() {
                graph.vertices().collect()
            } else {
                second
            };
            pool.into_iter()
                .min_by_key(|&f| (graph.degree(f).unwrap(), xi_now(f), f))
        }
        SelectionPolicy::FewestSlotsFirst => graph
            .vertices()
            .min_by_key(|&f| (xi_now(f), graph.degree(f).unwrap(), f)),
    }
}

/// Sum-rate lower bound for a concurrent set whose pairwise interference is
/// at most `sigma`: every link is charged `(|V| - 1) * sigma` of
/// interference on top of the noise floor.
pub fn sum_rate_lower_bound(
    budget: &LinkBudget,
    active: &[(FlowId, usize)],
    sigma: f64,
) -> Result<f64> {
    for (i, &a) in active.iter().enumerate() {
        for &b in active.iter().skip(i + 1) {
            if budget.links_share_node(a, b) {
                return Err(Error::BoundPrecondition(format!(
                    "hops {a:?} and {b:?} share a node"
                )));
            }
            let worst = budget
                .interference_between(a, b)
                .max(budget.interference_between(b, a));
            if worst > sigma {
                return Err(Error::BoundPrecondition(format!(
                    "hops {a:?} and {b:?} interfere at {worst} mW above sigma {sigma}"
                )));
            }
        }
    }
    let extra = (active.len().saturating_sub(1)) as f64 * sigma;
    let denom = budget.noise_mw() + extra;
    let mut sum = 0.0;
    for &(f, h) in active {
        let entry = budget
            .entry(f, h)
            .ok_or_else(|| Error::BoundPrecondition(format!("flow {f} has no hop {h}")))?;
        sum += shannon_rate(
            budget.efficiency(),
            budget.bandwidth_hz(),
            entry.signal_mw,
            denom,
        );
    }
    Ok(sum)
}

// --- feasibility -------------------------------------------------------------

/// One transmission in one slot, the unit feasibility reasons about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotActivity {
    pub flow: FlowId,
    pub hop: usize,
}

/// A constraint breach found in a realized schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two node-sharing links active in the same slot.
    NodeSharing {
        slot: usize,
        flow_a: FlowId,
        flow_b: FlowId,
    },
    /// More than one hop of one flow active in the same slot.
    MultipleActivities { slot: usize, flow: FlowId },
    /// Hops out of order: a later hop ran before its predecessor started,
    /// or an earlier hop resumed after its successor had begun.
    HopOrder { slot: usize, flow: FlowId },
    /// Activity on a hop the flow's path does not have (including flows
    /// with no path at all).
    PathMismatch { slot: usize, flow: FlowId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NodeSharing {
                slot,
                flow_a,
                flow_b,
            } => {
                write!(f, "slot {slot}: flows {flow_a} and {flow_b} share a node")
            }
            Violation::MultipleActivities { slot, flow } => {
                write!(f, "slot {slot}: flow {flow} scheduled on two hops")
            }
            Violation::HopOrder { slot, flow } => {
                write!(f, "slot {slot}: flow {flow} ran a hop ahead of order")
            }
            Violation::PathMismatch { slot, flow } => {
                write!(f, "slot {slot}: flow {flow} active outside its path")
            }
        }
    }
}

/// Verify every scheduling constraint on a realized schedule: node-disjoint
/// concurrency, one hop per flow per slot, hop ordering and path
/// exclusivity. Returns all violations found.
///
/// Hop ordering is checked operationally: hops of a relay path run as
/// ordered segments, so a second hop before its first hop ever ran is a
/// violation, as is first-hop activity after the second hop started.
pub fn feasibility_check(
    activities: &[Vec<SlotActivity>],
    paths: &PathAssignment,
    flows: &[FlowSpec],
) -> Vec<Violation> {
    let hop_links = paths.hop_links(flows);
    let mut violations = Vec::new();
    let mut first_hop_seen = vec![false; flows.len()];
    let mut second_hop_seen = vec![false; flows.len()];

    for (slot, acts) in activities.iter().enumerate() {
        for (i, a) in acts.iter().enumerate() {
            if a.hop >= hop_links[a.flow].len() {
                violations.push(Violation::PathMismatch { slot, flow: a.flow });
                continue;
            }
            for b in &acts[i + 1..] {
                if b.hop >= hop_links[b.flow].len() {
                    continue;
                }
                if a.flow == b.flow {
                    violations.push(Violation::MultipleActivities { slot, flow: a.flow });
                } else if hop_links[a.flow][a.hop].shares_node(&hop_links[b.flow][b.hop]) {
                    violations.push(Violation::NodeSharing {
                        slot,
                        flow_a: a.flow,
                        flow_b: b.flow,
                    });
                }
            }
            match a.hop {
                0 => {
                    if second_hop_seen[a.flow] {
                        violations.push(Violation::HopOrder { slot, flow: a.flow });
                    }
                    first_hop_seen[a.flow] = true;
                }
                1 => {
                    if !first_hop_seen[a.flow] {
                        violations.push(Violation::HopOrder { slot, flow: a.flow });
                    }
                    second_hop_seen[a.flow] = true;
                }
                _ => {}
            }
        }
    }
    violations
}

/// Expand a schedule matrix into per-slot activity lists.
pub fn matrix_activities(matrix: &ScheduleMatrix) -> Vec<Vec<SlotActivity>> {
    (0..matrix.num_slots())
        .map(|slot| {
            matrix
                .active_hops(slot)
                .into_iter()
                .map(|(flow, hop)| SlotActivity { flow, hop })
                .collect()
        })
        .collect()
}

/// Feasibility of a whole schedule matrix against its path assignment.
pub fn check_schedule(
    matrix: &ScheduleMatrix,
    paths: &PathAssignment,
    flows: &[FlowSpec],
) -> Vec<Violation> {
    feasibility_check(&matrix_activities(matrix), paths, flows)
}
