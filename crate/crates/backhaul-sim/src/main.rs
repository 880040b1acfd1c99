use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use backhaul_sim::baselines::{run_scheme, run_scheme_with, SchemeId};
use backhaul_sim::harness::{
    build_scenario, load_config, run_experiment, write_sweep_outputs, BaseParams, SweepSpec,
};
use backhaul_sim::oracle::{run_gap_study_with, TinyLimits};
use backhaul_sim::scheduler::check_schedule;

/// mmWave backhaul scheduling simulator.
#[derive(Parser)]
#[command(name = "backhaul-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write long plus aggregated CSV files.
    Run(RunArgs),
    /// Compare the slot scheduler against the exact solver on tiny instances.
    OracleGap(OracleGapArgs),
    /// Run one scenario and print the full schedule matrix.
    DumpSchedule(DumpArgs),
    /// Check schedule feasibility across seeds and schemes.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonScenarioArgs {
    /// TOML experiment configuration; defaults match the parameter table.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonScenarioArgs,
    /// Schemes to run: comma-separated raqs,random-relay,stdma,mqis or "all".
    #[arg(long, default_value = "all")]
    scheme: String,
    /// Blocked-flow counts, e.g. "5" or "0,1,2" or "0-10".
    #[arg(long, default_value = "5")]
    blocked: String,
    /// Contention thresholds in mW, comma-separated; "grid" for the
    /// default log-spaced sweep.
    #[arg(long, default_value = "0.01")]
    sigma: String,
    /// Relay selection parameters, comma-separated.
    #[arg(long, default_value = "0.53")]
    beta: String,
    /// Repetitions per grid point.
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Master seed; repetition seeds derive from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path; the aggregate lands next to it as *.agg.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleGapArgs {
    /// Number of solvable tiny instances to collect.
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Largest flow count per instance (hard cap 3).
    #[arg(long, default_value_t = 3)]
    max_flows: usize,
    /// Largest slot count per instance (hard cap 8).
    #[arg(long, default_value_t = 8)]
    max_slots: usize,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 0.53)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    common: CommonScenarioArgs,
    #[arg(long, default_value = "raqs")]
    scheme: String,
    #[arg(long, default_value_t = 5)]
    blocked: usize,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 0.53)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also print contention-graph rebuilds (slot, vertices, edges).
    #[arg(long)]
    graphs: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonScenarioArgs,
    /// Number of seeded scenarios to check.
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 0.53)]
    beta: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run_sweep(args),
        Command::OracleGap(args) => oracle_gap(args),
        Command::DumpSchedule(args) => dump_schedule(args),
        Command::Validate(args) => validate(args),
    }
}

fn base_params(common: &CommonScenarioArgs) -> anyhow::Result<BaseParams> {
    match &common.config {
        Some(path) => load_config(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(BaseParams::default()),
    }
}

fn parse_schemes(text: &str) -> anyhow::Result<Vec<SchemeId>> {
    if text.eq_ignore_ascii_case("all") {
        return Ok(SchemeId::ALL.to_vec());
    }
    text.split(',')
        .map(|s| s.trim().parse::<SchemeId>().map_err(Into::into))
        .collect()
}

fn parse_blocked(text: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once('-') {
        let lo: usize = lo.trim().parse()?;
        let hi: usize = hi.trim().parse()?;
        if hi < lo {
            bail!("invalid blocked range '{text}'");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

fn parse_sigmas(text: &str) -> anyhow::Result<Vec<f64>> {
    if text.eq_ignore_ascii_case("grid") {
        return Ok(backhaul_sim::harness::default_sigma_grid());
    }
    parse_floats(text)
}

fn parse_floats(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(Into::into))
        .collect()
}

fn run_sweep(args: RunArgs) -> anyhow::Result<()> {
    let spec = SweepSpec {
        schemes: parse_schemes(&args.scheme)?,
        blocked_counts: parse_blocked(&args.blocked)?,
        sigma_values: parse_sigmas(&args.sigma)?,
        beta_values: parse_floats(&args.beta)?,
        repetitions: args.reps,
        base: base_params(&args.common)?,
        master_seed: args.seed,
    };
    let records = run_experiment(&spec)?;
    let (long_path, agg_path) = write_sweep_outputs(&records, &args.out)?;
    println!(
        "wrote {} rows to {} and {} aggregates to {}",
        records.len(),
        long_path.display(),
        backhaul_sim::harness::aggregate(&records).len(),
        agg_path.display()
    );
    Ok(())
}

fn oracle_gap(args: OracleGapArgs) -> anyhow::Result<()> {
    let limits = TinyLimits {
        max_flows: args.max_flows,
        max_slots: args.max_slots,
    };
    let summary = run_gap_study_with(args.seed, args.instances, args.sigma, args.beta, limits)?;
    println!("seed,flows,slots,oracle_completed,heuristic_completed,gap");
    for r in &summary.records {
        println!(
            "{},{},{},{},{},{}",
            r.seed,
            r.flows,
            r.slots,
            r.oracle_completed,
            r.heuristic_completed,
            r.gap()
        );
    }
    println!(
        "# instances={} mean_gap={} max_gap={} dominance_violations={}",
        summary.records.len(),
        summary.mean_gap,
        summary.max_gap,
        summary.dominance_violations
    );
    if summary.dominance_violations > 0 {
        bail!("heuristic exceeded the oracle optimum");
    }
    Ok(())
}

fn dump_schedule(args: DumpArgs) -> anyhow::Result<()> {
    let base = base_params(&args.common)?;
    if args.blocked > base.n_flows {
        bail!("blocked {} > flows {}", args.blocked, base.n_flows);
    }
    let scheme: SchemeId = args.scheme.parse()?;
    let scenario = build_scenario(&base, args.seed, args.blocked)?;
    let outcome = run_scheme_with(
        scheme,
        &scenario,
        args.sigma,
        args.beta,
        args.seed ^ 0x7e1a,
        args.graphs,
    )?;
    for (f, path) in outcome.paths.iter() {
        println!("# flow {f}: {path}");
    }
    println!(
        "# slot,{}",
        (0..scenario.flows.len())
            .map(|f| format!("f{f}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    for (slot, row) in outcome.matrix.dump_rows().iter().enumerate() {
        println!("{slot},{row}");
    }
    if args.graphs {
        for trace in &outcome.rebuilds {
            println!(
                "# rebuild slot={} vertices={:?} edges={:?} invalid={:?} selected={:?}",
                trace.slot, trace.vertices, trace.edges, trace.invalid, trace.selected
            );
        }
    }
    println!(
        "# completed={} throughput_bps={}",
        outcome.metrics.completed_flows, outcome.metrics.system_throughput_bps
    );
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<()> {
    let base = base_params(&args.common)?;
    let mut total_violations = 0usize;
    let mut runs = 0usize;
    for i in 0..args.seeds {
        let seed = backhaul_sim::harness::repetition_seed(args.seed, i);
        let blocked = i % (base.n_flows + 1);
        let scenario = build_scenario(&base, seed, blocked)?;
        for scheme in SchemeId::ALL {
            let outcome = run_scheme(scheme, &scenario, args.sigma, args.beta, seed ^ 0x7e1a)?;
            let violations = check_schedule(&outcome.matrix, &outcome.paths, &scenario.flows);
            runs += 1;
            if !violations.is_empty() {
                total_violations += violations.len();
                for v in &violations {
                    eprintln!("seed {seed} scheme {scheme}: {v}");
                }
            }
        }
    }
    println!("checked {runs} schedules, {total_violations} violations");
    if total_violations > 0 {
        bail!("feasibility violations found");
    }
    Ok(())
}
