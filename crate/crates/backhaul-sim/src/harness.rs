//! Monte Carlo experiment runner: seeded parameter sweeps over schemes,
//! blocked-flow counts, contention thresholds and relay selection
//! parameters, with long-format and aggregated CSV output.
//!
//! Seeding is paired: repetition `r` of every grid point uses the same
//! derived scenario seed, so scheme comparisons are paired and rerunning a
//! sweep with the same master seed reproduces the output byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::baselines::{run_scheme, SchemeId};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::model::{generate_flows, generate_topology, FrameConfig, Scenario};

/// Environment variable that redirects relative output paths.
pub const OUT_DIR_ENV: &str = "BACKHAUL_SIM_OUT_DIR";

/// Scenario-generation parameters shared by every run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseParams {
    pub n_bs: usize,
    pub relay_lambda: f64,
    pub area_side: f64,
    pub n_flows: usize,
    pub qos_min_bps: f64,
    pub qos_max_bps: f64,
    pub frame: FrameConfig,
    pub channel: ChannelParams,
}

impl Default for BaseParams {
    fn default() -> Self {
        BaseParams {
            n_bs: 10,
            relay_lambda: 30.0,
            area_side: 100.0,
            n_flows: 10,
            qos_min_bps: 1e9,
            qos_max_bps: 3e9,
            frame: FrameConfig::default(),
            channel: ChannelParams::default(),
        }
    }
}

/// A full sweep: the cross product of schemes, blocked counts, thresholds
/// and relay selection parameters, each repeated `repetitions` times.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub schemes: Vec<SchemeId>,
    pub blocked_counts: Vec<usize>,
    pub sigma_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub repetitions: usize,
    pub base: BaseParams,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty()
            || self.blocked_counts.is_empty()
            || self.sigma_values.is_empty()
            || self.beta_values.is_empty()
        {
            return Err(Error::Config("empty sweep axis".into()));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        for &b in &self.blocked_counts {
            if b > self.base.n_flows {
                return Err(Error::Config(format!(
                    "blocked count {b} exceeds flow count {}",
                    self.base.n_flows
                )));
            }
        }
        for &s in &self.sigma_values {
            if s.is_nan() || s < 0.0 {
                return Err(Error::Config(format!("sigma {s} must be non-negative")));
            }
        }
        for &b in &self.beta_values {
            if b.is_nan() || b <= 0.0 {
                return Err(Error::Config(format!("beta {b} must be positive")));
            }
        }
        self.base.frame.validate()?;
        self.base.channel.validate()?;
        Ok(())
    }
}

/// One (grid point, repetition) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scheme: SchemeId,
    pub blocked: usize,
    pub sigma: f64,
    pub beta: f64,
    pub seed: u64,
    pub completed: usize,
    pub throughput_bps: f64,
}

/// Mean and standard error over the repetitions of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggRecord {
    pub scheme: SchemeId,
    pub blocked: usize,
    pub sigma: f64,
    pub beta: f64,
    pub reps: usize,
    pub mean_completed: f64,
    pub stderr_completed: f64,
    pub mean_throughput_bps: f64,
    pub stderr_throughput_bps: f64,
}

/// Deterministic seed derivation (splitmix-style avalanche).
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Scenario seed of repetition `rep`; shared by all schemes and grid axes.
pub fn repetition_seed(master_seed: u64, rep: usize) -> u64 {
    mix_seed(master_seed, rep as u64 + 1)
}

const RELAY_SALT: u64 = 0x5245_4C41;

/// Build the scenario for one repetition. The blocked count selects which
/// flows are obstructed but leaves endpoints and demands untouched.
pub fn build_scenario(base: &BaseParams, seed: u64, n_blocked: usize) -> Result<Scenario> {
    let topology = generate_topology(
        mix_seed(seed, 1),
        base.n_bs,
        base.relay_lambda,
        base.area_side,
    )?;
    let flows = generate_flows(
        mix_seed(seed, 2),
        &topology,
        base.n_flows,
        (base.qos_min_bps, base.qos_max_bps),
        n_blocked,
    )?;
    Ok(Scenario {
        topology,
        flows,
        frame: base.frame,
        channel: base.channel.clone(),
        seed,
    })
}

/// Run the whole sweep. Grid points and repetitions execute in parallel;
/// rows come back sorted by (scheme, blocked, sigma, beta, repetition).
pub fn run_experiment(spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &scheme in &spec.schemes {
        for &blocked in &spec.blocked_counts {
            for &sigma in &spec.sigma_values {
                for &beta in &spec.beta_values {
                    for rep in 0..spec.repetitions {
                        jobs.push((scheme, blocked, sigma, beta, rep));
                    }
                }
            }
        }
    }
    let records: Result<Vec<RunRecord>> = jobs
        .into_par_iter()
        .map(|(scheme, blocked, sigma, beta, rep)| {
            let seed = repetition_seed(spec.master_seed, rep);
            let scenario = build_scenario(&spec.base, seed, blocked)?;
            let outcome = run_scheme(scheme, &scenario, sigma, beta, mix_seed(seed, RELAY_SALT))?;
            Ok(RunRecord {
                scheme,
                blocked,
                sigma,
                beta,
                seed,
                completed: outcome.metrics.completed_flows,
                throughput_bps: outcome.metrics.system_throughput_bps,
            })
        })
        .collect();
    let mut records = records?;
    records.sort_by(|a, b| {
        (a.scheme, a.blocked)
            .cmp(&(b.scheme, b.blocked))
            .then(a.sigma.partial_cmp(&b.sigma).unwrap())
            .then(a.beta.partial_cmp(&b.beta).unwrap())
            .then(a.seed.cmp(&b.seed))
    });
    Ok(records)
}

/// Group sorted records by grid point and reduce to mean and stderr.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggRecord> {
    let mut groups: BTreeMap<(SchemeId, usize, u64, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.scheme, r.blocked, r.sigma.to_bits(), r.beta.to_bits()))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|rows| {
            let n = rows.len();
            let completed: Vec<f64> = rows.iter().map(|r| r.completed as f64).collect();
            let throughput: Vec<f64> = rows.iter().map(|r| r.throughput_bps).collect();
            let first = rows[0];
            AggRecord {
                scheme: first.scheme,
                blocked: first.blocked,
                sigma: first.sigma,
                beta: first.beta,
                reps: n,
                mean_completed: mean(&completed),
                stderr_completed: stderr(&completed),
                mean_throughput_bps: mean(&throughput),
                stderr_throughput_bps: stderr(&throughput),
            }
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean (sample standard deviation over sqrt n).
pub fn stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

pub const LONG_CSV_HEADER: &str = "scheme,blocked,sigma,beta,seed,completed,throughput_bps";
pub const AGG_CSV_HEADER: &str = "scheme,blocked,sigma,beta,reps,mean_completed,stderr_completed,mean_throughput_bps,stderr_throughput_bps";

pub fn long_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(LONG_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scheme, r.blocked, r.sigma, r.beta, r.seed, r.completed, r.throughput_bps
        ));
    }
    out
}

pub fn agg_csv(records: &[AggRecord]) -> String {
    let mut out = String::from(AGG_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.scheme,
            r.blocked,
            r.sigma,
            r.beta,
            r.reps,
            r.mean_completed,
            r.stderr_completed,
            r.mean_throughput_bps,
            r.stderr_throughput_bps
        ));
    }
    out
}

/// Log-spaced default threshold grid, half-decade steps over 1e-4..1e2 mW.
pub fn default_sigma_grid() -> Vec<f64> {
    (0..=12)
        .map(|i| 10f64.powf(-4.0 + 0.5 * i as f64))
        .collect()
}

/// Resolve an output path against [`OUT_DIR_ENV`] when it is relative.
pub fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => PathBuf::from(dir).join(path),
        None => path.to_path_buf(),
    }
}

/// Sibling path for the aggregated CSV: `fig5.csv` becomes `fig5.agg.csv`.
pub fn agg_path(path: &Path) -> PathBuf {
    path.with_extension("agg.csv")
}

/// Write the long and aggregated CSV files for a finished sweep.
pub fn write_sweep_outputs(records: &[RunRecord], out: &Path) -> Result<(PathBuf, PathBuf)> {
    let long_path = resolve_out_path(out);
    let agg_out = agg_path(&long_path);
    if let Some(parent) = long_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    std::fs::write(&long_path, long_csv(records))
        .map_err(|e| Error::io(long_path.display().to_string(), e))?;
    std::fs::write(&agg_out, agg_csv(&aggregate(records)))
        .map_err(|e| Error::io(agg_out.display().to_string(), e))?;
    Ok((long_path, agg_out))
}

// --- experiment configuration ------------------------------------------------

/// On-disk experiment configuration. Every key is optional; omitted keys
/// fall back to the defaults above. Radio quantities use field units
/// (dBm/MHz, MHz, GHz) and are converted to linear milliwatt bookkeeping
/// on load.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigDoc {
    scenario: ScenarioSection,
    frame: FrameSection,
    channel: ChannelSection,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioSection {
    n_bs: usize,
    relay_lambda: f64,
    area_side: f64,
    n_flows: usize,
    qos_min_bps: f64,
    qos_max_bps: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let b = BaseParams::default();
        ScenarioSection {
            n_bs: b.n_bs,
            relay_lambda: b.relay_lambda,
            area_side: b.area_side,
            n_flows: b.n_flows,
            qos_min_bps: b.qos_min_bps,
            qos_max_bps: b.qos_max_bps,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FrameSection {
    num_slots: usize,
    slot_us: f64,
    sched_us: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        let f = FrameConfig::default();
        FrameSection {
            num_slots: f.num_slots,
            slot_us: f.slot_us,
            sched_us: f.sched_us,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ChannelSection {
    tx_power_mw: f64,
    path_loss_exp: f64,
    mui_factor: f64,
    efficiency: f64,
    bandwidth_mhz: f64,
    noise_dbm_per_mhz: f64,
    carrier_ghz: f64,
    half_power_beamwidth_deg: f64,
    k_factor: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            tx_power_mw: 1000.0,
            path_loss_exp: 2.0,
            mui_factor: 1.0,
            efficiency: 0.5,
            bandwidth_mhz: 1200.0,
            noise_dbm_per_mhz: -134.0,
            carrier_ghz: 60.0,
            half_power_beamwidth_deg: 30.0,
            k_factor: ChannelParams::default().k_factor,
        }
    }
}

impl ConfigDoc {
    fn into_base(self) -> BaseParams {
        BaseParams {
            n_bs: self.scenario.n_bs,
            relay_lambda: self.scenario.relay_lambda,
            area_side: self.scenario.area_side,
            n_flows: self.scenario.n_flows,
            qos_min_bps: self.scenario.qos_min_bps,
            qos_max_bps: self.scenario.qos_max_bps,
            frame: FrameConfig {
                num_slots: self.frame.num_slots,
                slot_us: self.frame.slot_us,
                sched_us: self.frame.sched_us,
            },
            channel: ChannelParams {
                tx_power_mw: self.channel.tx_power_mw,
                path_loss_exp: self.channel.path_loss_exp,
                mui_factor: self.channel.mui_factor,
                efficiency: self.channel.efficiency,
                bandwidth_hz: self.channel.bandwidth_mhz * 1e6,
                noise_mw_per_hz: 10f64.powf(self.channel.noise_dbm_per_mhz / 10.0) / 1e6,
                wavelength_m: 3e8 / (self.channel.carrier_ghz * 1e9),
                k_factor: self.channel.k_factor,
                beamwidth_deg: self.channel.half_power_beamwidth_deg,
            },
        }
    }
}

/// Parse a TOML experiment configuration into base parameters.
pub fn parse_config(text: &str) -> Result<BaseParams> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let base = doc.into_base();
    base.frame.validate()?;
    base.channel.validate()?;
    Ok(base)
}

/// Load a TOML experiment configuration file.
pub fn load_config(path: &Path) -> Result<BaseParams> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config(&text)
}
