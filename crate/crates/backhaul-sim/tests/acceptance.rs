//! Acceptance suite: every headline property of the simulator as one test
//! per criterion, each printing a single PASS/FAIL line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! The sweeps use the default parameter set, sigma = 0.01 mW, beta = 0.53,
//! and 100 paired repetitions seeded from one master seed, so scheme
//! comparisons are paired and the whole suite is reproducible.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use backhaul_sim::baselines::{run_scheme, SchemeId};
use backhaul_sim::channel::{
    noise_power, AntennaPattern, ChannelParams, DirectedLink, LinkBudget, LinkModel,
};
use backhaul_sim::harness::{
    aggregate, build_scenario, default_sigma_grid, long_csv, mix_seed, repetition_seed,
    run_experiment, AggRecord, BaseParams, RunRecord, SweepSpec,
};
use backhaul_sim::model::{Node, NodeId, NodeRole, Position, Topology};
use backhaul_sim::oracle::run_gap_study;
use backhaul_sim::relay::select_paths;
use backhaul_sim::scheduler::{check_schedule, sum_rate_lower_bound};

const MASTER_SEED: u64 = 42;
const REPS: usize = 100;
const SIGMA: f64 = 0.01;
const BETA: f64 = 0.53;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn blocked_sweep_spec() -> SweepSpec {
    SweepSpec {
        schemes: SchemeId::ALL.to_vec(),
        blocked_counts: (0..=10).collect(),
        sigma_values: vec![SIGMA],
        beta_values: vec![BETA],
        repetitions: REPS,
        base: BaseParams::default(),
        master_seed: MASTER_SEED,
    }
}

/// The blocked-count sweep shared by criteria 1, 2 and 8.
fn blocked_sweep() -> &'static (Vec<RunRecord>, Duration) {
    static SWEEP: OnceLock<(Vec<RunRecord>, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let records = run_experiment(&blocked_sweep_spec()).expect("blocked sweep");
        (records, start.elapsed())
    })
}

fn mean_of(aggs: &[AggRecord], scheme: SchemeId, blocked: usize) -> &AggRecord {
    aggs.iter()
        .find(|a| a.scheme == scheme && a.blocked == blocked)
        .expect("aggregate present")
}

#[test]
fn criterion_1_scheme_ordering_of_completed_flows() {
    let (records, elapsed) = blocked_sweep();
    let aggs = aggregate(records);
    let mut failures = Vec::new();
    for blocked in 2..=10usize {
        let raqs = mean_of(&aggs, SchemeId::Raqs, blocked).mean_completed;
        let random = mean_of(&aggs, SchemeId::RandomRelay, blocked).mean_completed;
        let stdma = mean_of(&aggs, SchemeId::Stdma, blocked).mean_completed;
        let mqis = mean_of(&aggs, SchemeId::Mqis, blocked).mean_completed;
        if raqs < random {
            failures.push(format!(
                "raqs {raqs:.2} < random {random:.2} at blocked={blocked}"
            ));
        }
        if random < stdma {
            failures.push(format!(
                "random {random:.2} < stdma {stdma:.2} at blocked={blocked}"
            ));
        }
        if random < mqis {
            failures.push(format!(
                "random {random:.2} < mqis {mqis:.2} at blocked={blocked}"
            ));
        }
    }
    let raqs10 = mean_of(&aggs, SchemeId::Raqs, 10).mean_completed;
    let random10 = mean_of(&aggs, SchemeId::RandomRelay, 10).mean_completed;
    let margin = raqs10 / random10 - 1.0;
    if margin < 0.15 {
        failures.push(format!("blocked=10 margin {:.1}% < 15%", margin * 100.0));
    }
    let pass = failures.is_empty() && elapsed.as_secs() < 300;
    report(
        "1 (completed-flow ordering)",
        pass,
        &format!(
            "blocked=10 margin {:+.1}%, sweep took {elapsed:.1?}; issues: [{}]",
            margin * 100.0,
            failures.join("; ")
        ),
    );
    assert!(
        elapsed.as_secs() < 300,
        "sweep exceeded its five-minute budget: {elapsed:?}"
    );
    assert!(failures.is_empty(), "ordering failures: {failures:?}");
}

#[test]
fn criterion_2_throughput_margin_under_full_blockage() {
    let (records, _) = blocked_sweep();
    let aggs = aggregate(records);
    let raqs = mean_of(&aggs, SchemeId::Raqs, 10).mean_throughput_bps;
    let random = mean_of(&aggs, SchemeId::RandomRelay, 10).mean_throughput_bps;
    let margin = raqs / random - 1.0;
    let pass = margin >= 0.20;
    report(
        "2 (throughput margin)",
        pass,
        &format!(
            "raqs {raqs:.3e} vs random-relay {random:.3e} at blocked=10: {:+.1}% (need >= +20%)",
            margin * 100.0
        ),
    );
    assert!(pass, "throughput margin {margin:.3} below 0.20");
}

#[test]
fn criterion_3_sigma_sweep_unimodal_with_flat_tail() {
    let spec = SweepSpec {
        schemes: vec![SchemeId::Raqs],
        blocked_counts: vec![5],
        sigma_values: default_sigma_grid(),
        beta_values: vec![BETA],
        repetitions: REPS,
        base: BaseParams::default(),
        master_seed: MASTER_SEED,
    };
    let aggs = aggregate(&run_experiment(&spec).expect("sigma sweep"));
    assert_eq!(aggs.len(), spec.sigma_values.len());
    let means: Vec<f64> = aggs.iter().map(|a| a.mean_completed).collect();
    let errs: Vec<f64> = aggs.iter().map(|a| a.stderr_completed).collect();

    // No interior point more than one stderr below both neighbors.
    let mut dips = Vec::new();
    for i in 1..means.len() - 1 {
        if means[i] < means[i - 1] - errs[i] && means[i] < means[i + 1] - errs[i] {
            dips.push(format!("dip at sigma {}", aggs[i].sigma));
        }
    }

    // Above the largest observed pairwise interference the graphs cannot
    // change, so the curve must be flat.
    let mut max_interference: f64 = 0.0;
    for rep in 0..REPS {
        let scenario = build_scenario(&BaseParams::default(), repetition_seed(MASTER_SEED, rep), 5)
            .expect("scenario");
        let model = LinkModel::for_scenario(&scenario);
        let paths = select_paths(&model, &scenario.flows, BETA).expect("paths");
        let budget = LinkBudget::build(&model, &paths.hop_links(&scenario.flows)).expect("budget");
        max_interference = max_interference.max(budget.max_pairwise_interference());
    }
    let tail: Vec<usize> = (0..aggs.len())
        .filter(|&i| aggs[i].sigma > max_interference)
        .collect();
    let mut flat_issues = Vec::new();
    if tail.len() < 2 {
        flat_issues.push(format!(
            "grid has {} points above the observed maximum {max_interference:.3e} mW",
            tail.len()
        ));
    } else {
        let last = *tail.last().unwrap();
        for &i in &tail {
            let tolerance = errs[i].max(errs[last]) + 1e-9;
            if (means[i] - means[last]).abs() > tolerance {
                flat_issues.push(format!(
                    "sigma {} mean {:.3} deviates from tail mean {:.3}",
                    aggs[i].sigma, means[i], means[last]
                ));
            }
        }
    }

    let pass = dips.is_empty() && flat_issues.is_empty();
    report(
        "3 (threshold sweep shape)",
        pass,
        &format!(
            "means {:?}, max pairwise interference {max_interference:.3e} mW, tail of {} points; issues: [{}{}]",
            means.iter().map(|m| (m * 100.0).round() / 100.0).collect::<Vec<_>>(),
            tail.len(),
            dips.join("; "),
            flat_issues.join("; ")
        ),
    );
    assert!(dips.is_empty(), "{dips:?}");
    assert!(flat_issues.is_empty(), "{flat_issues:?}");
}

#[test]
fn criterion_4_relay_parameter_monotone_flattening() {
    let grid = [0.9, 0.8, 0.7, 0.6, 0.53, 0.45, 0.38, 0.3];
    let spec = SweepSpec {
        schemes: vec![SchemeId::Raqs],
        blocked_counts: vec![5],
        sigma_values: vec![SIGMA],
        beta_values: grid.to_vec(),
        repetitions: REPS,
        base: BaseParams::default(),
        master_seed: MASTER_SEED,
    };
    let aggs = aggregate(&run_experiment(&spec).expect("beta sweep"));
    let at = |beta: f64| aggs.iter().find(|a| a.beta == beta).expect("beta present");
    let mut issues = Vec::new();
    for pair in grid.windows(2) {
        let (hi, lo) = (at(pair[0]), at(pair[1]));
        let tolerance = hi.stderr_completed.max(lo.stderr_completed);
        if lo.mean_completed < hi.mean_completed - tolerance {
            issues.push(format!(
                "lowering beta {} -> {} dropped the mean {:.2} -> {:.2}",
                pair[0], pair[1], hi.mean_completed, lo.mean_completed
            ));
        }
    }
    let gain = at(0.3).mean_completed / at(0.53).mean_completed - 1.0;
    if gain >= 0.05 {
        issues.push(format!(
            "gain from beta 0.53 to 0.3 is {:.1}%",
            gain * 100.0
        ));
    }
    let curve: Vec<f64> = grid.iter().map(|&b| at(b).mean_completed).collect();
    let pass = issues.is_empty();
    report(
        "4 (relay parameter flattening)",
        pass,
        &format!(
            "means over beta {grid:?}: {:?}; gain 0.53->0.3 {:+.2}%; issues: [{}]",
            curve
                .iter()
                .map(|m| (m * 100.0).round() / 100.0)
                .collect::<Vec<_>>(),
            gain * 100.0,
            issues.join("; ")
        ),
    );
    assert!(pass, "{issues:?}");
}

#[test]
fn criterion_5_oracle_gap() {
    let start = Instant::now();
    let summary = run_gap_study(0x5eed, 200, SIGMA, BETA).expect("gap study");
    let elapsed = start.elapsed();
    let pass =
        summary.dominance_violations == 0 && summary.mean_gap <= 0.5 && elapsed.as_secs() < 600;
    report(
        "5 (exact-solver gap)",
        pass,
        &format!(
            "{} instances, mean gap {:.3}, max gap {}, dominance violations {}, took {elapsed:.1?}",
            summary.records.len(),
            summary.mean_gap,
            summary.max_gap,
            summary.dominance_violations
        ),
    );
    assert_eq!(
        summary.dominance_violations, 0,
        "heuristic beat the exact solver"
    );
    assert!(
        summary.mean_gap <= 0.5,
        "mean gap {} too large",
        summary.mean_gap
    );
    assert!(
        elapsed.as_secs() < 600,
        "gap study exceeded ten minutes: {elapsed:?}"
    );
}

#[test]
fn criterion_6_feasibility_across_schemes_and_seeds() {
    let base = BaseParams::default();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut first_failure = String::new();
    for i in 0..1000usize {
        let seed = repetition_seed(0xFEA5, i);
        let blocked = i % (base.n_flows + 1);
        let scenario = build_scenario(&base, seed, blocked).expect("scenario");
        for scheme in SchemeId::ALL {
            let outcome =
                run_scheme(scheme, &scenario, SIGMA, BETA, mix_seed(seed, 0x7e1a)).expect("run");
            let found = check_schedule(&outcome.matrix, &outcome.paths, &scenario.flows);
            checked += 1;
            if !found.is_empty() {
                violations += found.len();
                if first_failure.is_empty() {
                    first_failure = format!("{scheme} seed {seed}: {}", found[0]);
                }
            }
        }
    }
    let pass = violations == 0;
    report(
        "6 (feasibility suite)",
        pass,
        &format!("{checked} schedules checked, {violations} violations {first_failure}"),
    );
    assert_eq!(violations, 0, "{first_failure}");
}

#[test]
fn criterion_7_formula_checks() {
    let mut issues = Vec::new();

    // Antenna gain closed forms at boresight and the half-power point.
    let pattern = AntennaPattern::new(30.0);
    let g0_db = 10.0 * ((1.6162 / 15f64.to_radians().sin()).powi(2)).log10();
    let g0 = 10f64.powf(g0_db / 10.0);
    let at0 = pattern.gain_linear(0.0).unwrap();
    if (at0 - g0).abs() / g0 > 1e-9 {
        issues.push(format!("boresight gain {at0} vs closed form {g0}"));
    }
    let expected_half = 10f64.powf((g0_db - 3.01) / 10.0);
    let at_half = pattern.gain_linear(15.0).unwrap();
    if (at_half - expected_half).abs() / expected_half > 1e-9 {
        issues.push(format!(
            "half-power gain {at_half} vs closed form {expected_half}"
        ));
    }

    // Noise power against the dBm value.
    let noise_dbm = 10.0 * noise_power(&ChannelParams::default()).log10();
    if (noise_dbm - (-103.21)).abs() > 0.01 {
        issues.push(format!("noise {noise_dbm} dBm vs -103.21 +- 0.01"));
    }

    // Adding interferers never raises a rate, over random geometries.
    let params = ChannelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x90_90);
    for case in 0..1000 {
        let nodes: Vec<Node> = (0..6)
            .map(|i| Node {
                id: NodeId(i),
                role: NodeRole::BaseStation,
                pos: Position::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
            })
            .collect();
        let topology = Topology::new(nodes, 100.0).unwrap();
        let model = LinkModel::new(&params, &topology, Default::default());
        let link = DirectedLink::new(NodeId(0), NodeId(1));
        let one = DirectedLink::new(NodeId(2), NodeId(3));
        let two = DirectedLink::new(NodeId(4), NodeId(5));
        let free = model.slot_rate(link, &[]).unwrap();
        let with_one = model.slot_rate(link, &[one]).unwrap();
        let with_two = model.slot_rate(link, &[one, two]).unwrap();
        if !(with_one <= free && with_two <= with_one) {
            issues.push(format!(
                "case {case}: rates not monotone ({free} -> {with_one} -> {with_two})"
            ));
            break;
        }
    }

    // The sum-rate lower bound holds in every scheduled slot.
    let base = BaseParams::default();
    let mut slots_checked = 0usize;
    'runs: for rep in 0..100usize {
        let scenario =
            build_scenario(&base, repetition_seed(MASTER_SEED, rep), 5).expect("scenario");
        let model = LinkModel::for_scenario(&scenario);
        let paths = select_paths(&model, &scenario.flows, BETA).expect("paths");
        let outcome = backhaul_sim::scheduler::run_schedule(&scenario, &paths, SIGMA).expect("run");
        let budget = LinkBudget::build(&model, &paths.hop_links(&scenario.flows)).expect("budget");
        for slot in 0..scenario.frame.num_slots {
            let active = outcome.matrix.active_hops(slot);
            if active.is_empty() {
                continue;
            }
            let bound = sum_rate_lower_bound(&budget, &active, SIGMA).expect("precondition");
            let actual: f64 = active
                .iter()
                .map(|&(f, h)| budget.rate_with(f, h, &active))
                .sum();
            slots_checked += 1;
            if actual < bound - 1e-3 {
                issues.push(format!(
                    "slot {slot} rep {rep}: sum {actual} below bound {bound}"
                ));
                break 'runs;
            }
        }
    }

    let pass = issues.is_empty();
    report(
        "7 (formula checks)",
        pass,
        &format!(
            "{slots_checked} scheduled slots bounded; issues: [{}]",
            issues.join("; ")
        ),
    );
    assert!(pass, "{issues:?}");
}

#[test]
fn criterion_8_byte_identical_reruns() {
    let (records, _) = blocked_sweep();
    let first = long_csv(records);
    let second = long_csv(&run_experiment(&blocked_sweep_spec()).expect("rerun"));
    let pass = first == second;
    report(
        "8 (deterministic reruns)",
        pass,
        &format!("{} bytes compared", first.len()),
    );
    assert!(pass, "rerun produced different bytes");
}
