//! Exhaustive optimal scheduler for tiny instances, used to bound the
//! heuristic's optimality gap and to validate the constraint model.
//!
//! The objective and throughput accounting are shared with the slot
//! scheduler; only the search differs. The key structural fact: a slot's
//! rates depend only on which hops share that slot, so a schedule's
//! throughput is determined by the multiset of per-slot joint assignments,
//! not their order. The solver enumerates multisets of feasible joint
//! assignments, keeps the best one that admits an ordering with every relay
//! path's hops running as ordered segments, and materializes one such
//! ordering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelParams, LinkBudget, LinkModel};
use crate::error::{Error, Result};
use crate::model::{generate_flows, generate_topology, FlowId, FrameConfig, Scenario};
use crate::relay::{select_paths, PathAssignment};
use crate::scheduler::{run_schedule, ScheduleMatrix, ScheduleOutcome, SlotState};

/// Hard caps keeping exhaustive search tractable.
pub const MAX_FLOWS: usize = 3;
pub const MAX_SLOTS: usize = 8;
const DEFAULT_BUDGET: u128 = 50_000_000;

/// A problem small enough to solve exactly: at most [`MAX_FLOWS`] flows and
/// [`MAX_SLOTS`] slots, with paths already fixed.
#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub scenario: Scenario,
    pub paths: PathAssignment,
    pub node_budget: u128,
}

impl TinyInstance {
    pub fn new(scenario: Scenario, paths: PathAssignment) -> Result<Self> {
        if scenario.flows.len() > MAX_FLOWS {
            return Err(Error::InvalidParameter(format!(
                "tiny instance allows at most {MAX_FLOWS} flows"
            )));
        }
        if scenario.frame.num_slots > MAX_SLOTS {
            return Err(Error::InvalidParameter(format!(
                "tiny instance allows at most {MAX_SLOTS} slots"
            )));
        }
        Ok(TinyInstance {
            scenario,
            paths,
            node_budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, node_budget: u128) -> Self {
        self.node_budget = node_budget;
        self
    }
}

/// An optimal schedule and its objective value.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub matrix: ScheduleMatrix,
    pub completed: usize,
    pub throughput_bps: f64,
}

/// One joint per-slot assignment: the hops transmitting together.
#[derive(Debug, Clone)]
struct JointOption {
    hops: Vec<(FlowId, usize)>,
    /// Bits each member hop moves in one slot under this assignment.
    bits_per_slot: Vec<f64>,
}

impl JointOption {
    fn runs(&self, flow: FlowId, hop: usize) -> bool {
        self.hops.contains(&(flow, hop))
    }
}

#[derive(Debug, Clone)]
struct Best {
    counts: Vec<u8>,
    completed: usize,
    throughput_bits: f64,
}

/// Maximize the number of completed flows over every feasible schedule.
///
/// Ties on the completed count are broken toward higher total delivered
/// bits; the returned matrix is a deterministic materialization of the
/// winning multiset, busiest assignments scheduled as early as the hop
/// order allows.
pub fn solve_optimal(instance: &TinyInstance) -> Result<OracleSolution> {
    let scenario = &instance.scenario;
    scenario.validate()?;
    let model = LinkModel::for_scenario(scenario);
    let hop_links = instance.paths.hop_links(&scenario.flows);
    let budget = LinkBudget::build(&model, &hop_links)?;
    let num_slots = scenario.frame.num_slots;
    let slot_s = scenario.frame.slot_time_s();
    let superframe_s = scenario.frame.superframe_s();

    let options = enumerate_options(scenario, &budget, slot_s);
    let estimate = multiset_count(options.len() as u128, num_slots as u128);
    if estimate > instance.node_budget {
        return Err(Error::OverBudget {
            estimate,
            budget: instance.node_budget,
        });
    }

    let need_bits: Vec<Vec<f64>> = scenario
        .flows
        .iter()
        .map(|f| vec![f.qos_bps * superframe_s; budget.hops(f.id).len()])
        .collect();
    let two_hop_flows: Vec<FlowId> = (0..scenario.flows.len())
        .filter(|&f| budget.hops(f).len() == 2)
        .collect();

    let mut search = Search {
        options,
        two_hop_flows,
        need_bits,
        best: None,
    };
    let mut counts = vec![0u8; search.options.len()];
    let mut bits: Vec<Vec<f64>> = search
        .need_bits
        .iter()
        .map(|h| vec![0.0; h.len()])
        .collect();
    search.recurse(1, num_slots, &mut counts, &mut bits);

    let best = search
        .best
        .expect("the all-idle schedule is always feasible");
    let matrix = materialize(
        &search.options,
        &best.counts,
        scenario.flows.len(),
        num_slots,
    );
    Ok(OracleSolution {
        matrix,
        completed: best.completed,
        throughput_bps: best.throughput_bits / superframe_s,
    })
}

/// Number of multisets of size `slots` over `options` kinds:
/// C(options + slots - 1, slots), saturating.
fn multiset_count(options: u128, slots: u128) -> u128 {
    let mut result: u128 = 1;
    for i in 0..slots {
        result = match result.checked_mul(options + i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    result
}

/// All node-disjoint joint assignments over the flows' available hops.
/// Index 0 is the all-idle assignment; the rest are ordered busiest first
/// so materialized schedules do useful work early.
fn enumerate_options(scenario: &Scenario, budget: &LinkBudget, slot_s: f64) -> Vec<JointOption> {
    let mut combos: Vec<Vec<(FlowId, usize)>> = vec![Vec::new()];
    for flow in scenario.flows.iter().map(|f| f.id) {
        let hops = budget.hops(flow).len();
        let mut next = Vec::new();
        for combo in &combos {
            next.push(combo.clone());
            for hop in 0..hops {
                let disjoint = combo
                    .iter()
                    .all(|&member| !budget.links_share_node(member, (flow, hop)));
                if disjoint {
                    let mut extended = combo.clone();
                    extended.push((flow, hop));
                    next.push(extended);
                }
            }
        }
        combos = next;
    }
    combos.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let idle = combos.pop().expect("idle combo always present");
    debug_assert!(idle.is_empty());
    combos.insert(0, idle);

    combos
        .into_iter()
        .map(|hops| {
            let bits_per_slot = hops
                .iter()
                .map(|&(f, h)| budget.rate_with(f, h, &hops) * slot_s)
                .collect();
            JointOption {
                hops,
                bits_per_slot,
            }
        })
        .collect()
}

struct Search {
    options: Vec<JointOption>,
    two_hop_flows: Vec<FlowId>,
    /// Demand per hop in bits over the superframe, indexed like `bits`.
    need_bits: Vec<Vec<f64>>,
    best: Option<Best>,
}

impl Search {
    /// Choose a count for every non-idle option; idle absorbs the rest.
    fn recurse(
        &mut self,
        index: usize,
        slots_left: usize,
        counts: &mut Vec<u8>,
        bits: &mut Vec<Vec<f64>>,
    ) {
        if index == self.options.len() {
            self.evaluate(counts, bits);
            return;
        }
        self.recurse(index + 1, slots_left, counts, bits);
        for used in 1..=slots_left {
            counts[index] = used as u8;
            for (&(f, h), &b) in self.options[index]
                .hops
                .iter()
                .zip(&self.options[index].bits_per_slot)
            {
                bits[f][h] += b;
            }
            self.recurse(index + 1, slots_left - used, counts, bits);
        }
        let rollback = counts[index] as f64;
        for (&(f, h), &b) in self.options[index]
            .hops
            .iter()
            .zip(&self.options[index].bits_per_slot)
        {
            bits[f][h] -= b * rollback;
        }
        counts[index] = 0;
    }

    fn evaluate(&mut self, counts: &[u8], bits: &[Vec<f64>]) {
        let completed = bits
            .iter()
            .zip(&self.need_bits)
            .filter(|(got, need)| {
                !need.is_empty() && got.iter().zip(need.iter()).all(|(g, n)| g >= n)
            })
            .count();
        let throughput_bits: f64 = bits.iter().filter_map(|h| h.last()).sum();
        let better = match &self.best {
            None => true,
            Some(best) => {
                completed > best.completed
                    || (completed == best.completed && throughput_bits > best.throughput_bits)
            }
        };
        if better && segment_orderable(&self.options, counts, &self.two_hop_flows) {
            self.best = Some(Best {
                counts: counts.to_vec(),
                completed,
                throughput_bits,
            });
        }
    }
}

/// Whether the multiset admits an ordering in which, for every two-hop
/// flow, all of its first-hop slots precede all of its second-hop slots.
///
/// Equivalent formulation: second-hop use requires first-hop use, and the
/// precedence relation between assignment kinds (u before v when u runs
/// some flow's first hop and v that flow's second) must be acyclic.
fn segment_orderable(options: &[JointOption], counts: &[u8], two_hop_flows: &[FlowId]) -> bool {
    for &flow in two_hop_flows {
        let uses_second = used_kinds(counts).any(|k| options[k].runs(flow, 1));
        let uses_first = used_kinds(counts).any(|k| options[k].runs(flow, 0));
        if uses_second && !uses_first {
            return false;
        }
    }
    let kinds: Vec<usize> = used_kinds(counts).collect();
    // Depth-first cycle detection over the precedence digraph.
    let mut state = vec![0u8; options.len()]; // 0 unvisited, 1 in stack, 2 done
    fn visit(
        kind: usize,
        kinds: &[usize],
        options: &[JointOption],
        two_hop_flows: &[FlowId],
        state: &mut [u8],
    ) -> bool {
        state[kind] = 1;
        for &next in kinds {
            let precedes = two_hop_flows
                .iter()
                .any(|&f| options[kind].runs(f, 0) && options[next].runs(f, 1));
            if !precedes {
                continue;
            }
            if state[next] == 1 {
                return false;
            }
            if state[next] == 0 && !visit(next, kinds, options, two_hop_flows, state) {
                return false;
            }
        }
        state[kind] = 2;
        true
    }
    for &k in &kinds {
        if state[k] == 0 && !visit(k, &kinds, options, two_hop_flows, &mut state) {
            return false;
        }
    }
    true
}

fn used_kinds(counts: &[u8]) -> impl Iterator<Item = usize> + '_ {
    counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(k, _)| k)
}

/// Lay the winning multiset out over the slots: repeatedly emit all slots
/// of a kind none of whose predecessors remain, busiest kinds first, and
/// push the idle slots to the end.
fn materialize(
    options: &[JointOption],
    counts: &[u8],
    num_flows: usize,
    num_slots: usize,
) -> ScheduleMatrix {
    let mut matrix = ScheduleMatrix::new(num_flows, num_slots);
    let mut remaining: Vec<u8> = counts.to_vec();
    let mut slot = 0usize;
    loop {
        let pending: Vec<usize> = used_kinds(&remaining).collect();
        if pending.is_empty() {
            break;
        }
        // A kind is ready when no pending kind must precede it. Acyclicity
        // was established when the multiset won, so one always exists.
        let ready = pending
            .iter()
            .copied()
            .find(|&kind| {
                !pending.iter().any(|&other| {
                    other != kind
                        && options[kind]
                            .hops
                            .iter()
                            .any(|&(f, h)| h == 1 && options[other].runs(f, 0))
                })
            })
            .expect("winning multiset must stay orderable");
        for _ in 0..remaining[ready] {
            for &(f, h) in &options[ready].hops {
                matrix.set(f, slot, SlotState::Active { hop: h });
            }
            slot += 1;
        }
        remaining[ready] = 0;
    }
    matrix
}

// --- gap study ---------------------------------------------------------------

/// Heuristic-versus-oracle result on one tiny instance.
#[derive(Debug, Clone)]
pub struct GapRecord {
    pub seed: u64,
    pub flows: usize,
    pub slots: usize,
    pub oracle_completed: usize,
    pub heuristic_completed: usize,
}

impl GapRecord {
    pub fn gap(&self) -> i64 {
        self.oracle_completed as i64 - self.heuristic_completed as i64
    }
}

#[derive(Debug, Clone)]
pub struct GapSummary {
    pub records: Vec<GapRecord>,
    pub mean_gap: f64,
    pub max_gap: i64,
    /// Instances where the heuristic beat the oracle; must stay zero.
    pub dominance_violations: usize,
}

/// Instance-size bounds for the gap study; never above the hard caps.
#[derive(Debug, Clone, Copy)]
pub struct TinyLimits {
    pub max_flows: usize,
    pub max_slots: usize,
}

impl Default for TinyLimits {
    fn default() -> Self {
        TinyLimits {
            max_flows: MAX_FLOWS,
            max_slots: MAX_SLOTS,
        }
    }
}

impl TinyLimits {
    pub fn validate(&self) -> Result<()> {
        if self.max_flows < 1 || self.max_flows > MAX_FLOWS {
            return Err(Error::InvalidParameter(format!(
                "max_flows must lie in 1..={MAX_FLOWS}"
            )));
        }
        if self.max_slots < 2 || self.max_slots > MAX_SLOTS {
            return Err(Error::InvalidParameter(format!(
                "max_slots must lie in 2..={MAX_SLOTS}"
            )));
        }
        Ok(())
    }
}

/// Random tiny scenario: a handful of base stations and relays in a small
/// area, no scheduling phase, and demands drawn so per-hop plans span one
/// slot up to a whole frame.
pub fn generate_tiny_scenario(seed: u64, limits: TinyLimits) -> Result<Scenario> {
    limits.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bs = rng.gen_range(2..=6usize);
    let n_flows = rng.gen_range(1..=limits.max_flows);
    let n_blocked = rng.gen_range(0..=n_flows);
    let num_slots = rng.gen_range(limits.max_slots.min(4)..=limits.max_slots);
    let frame = FrameConfig {
        num_slots,
        slot_us: 18.0,
        sched_us: 0.0,
    };
    let topology = generate_topology(seed ^ 0x7019_3a5b, n_bs, 5.0, 40.0)?;
    // Rates in a 40 m area sit around 20..23 Gbps.
    let flows = generate_flows(
        seed ^ 0x00c0_ffee,
        &topology,
        n_flows,
        (2e9, 20e9),
        n_blocked,
    )?;
    Ok(Scenario {
        topology,
        flows,
        frame,
        channel: ChannelParams::default(),
        seed,
    })
}

/// Heuristic and oracle side by side on one tiny instance.
pub fn gap_on_instance(
    seed: u64,
    sigma: f64,
    beta: f64,
    limits: TinyLimits,
) -> Result<(GapRecord, ScheduleOutcome, OracleSolution)> {
    let scenario = generate_tiny_scenario(seed, limits)?;
    let model = LinkModel::for_scenario(&scenario);
    let paths = select_paths(&model, &scenario.flows, beta)?;
    let instance = TinyInstance::new(scenario.clone(), paths.clone())?;
    let oracle = solve_optimal(&instance)?;
    let heuristic = run_schedule(&scenario, &paths, sigma)?;
    let record = GapRecord {
        seed,
        flows: scenario.flows.len(),
        slots: scenario.frame.num_slots,
        oracle_completed: oracle.completed,
        heuristic_completed: heuristic.metrics.completed_flows,
    };
    Ok((record, heuristic, oracle))
}

/// Run the gap study until `instances` solvable instances have been
/// collected, deterministically skipping any instance over budget.
pub fn run_gap_study(
    master_seed: u64,
    instances: usize,
    sigma: f64,
    beta: f64,
) -> Result<GapSummary> {
    run_gap_study_with(master_seed, instances, sigma, beta, TinyLimits::default())
}

pub fn run_gap_study_with(
    master_seed: u64,
    instances: usize,
    sigma: f64,
    beta: f64,
    limits: TinyLimits,
) -> Result<GapSummary> {
    limits.validate()?;
    let mut records = Vec::with_capacity(instances);
    let mut seed = master_seed;
    while records.len() < instances {
        seed = seed.wrapping_add(1);
        match gap_on_instance(seed, sigma, beta, limits) {
            Ok((record, _, _)) => records.push(record),
            Err(Error::OverBudget { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let mean_gap = records.iter().map(|r| r.gap() as f64).sum::<f64>() / records.len() as f64;
    let max_gap = records.iter().map(|r| r.gap()).max().unwrap_or(0);
    let dominance_violations = records.iter().filter(|r| r.gap() < 0).count();
    Ok(GapSummary {
        records,
        mean_gap,
        max_gap,
        dominance_violations,
    })
}
