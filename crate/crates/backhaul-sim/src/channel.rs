//! Directional antenna gains, received powers, noise and Shannon link rates.
//!
//! All power arithmetic is carried out in linear milliwatts; decibel values
//! appear only at I/O boundaries. Transmitters and receivers always point
//! their boresight at the peer of the hop they currently serve, so a link's
//! geometry is fully determined by node positions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ordered_pair, FlowId, NodeId, Position, Scenario, Topology};

/// Proportionality applied to the bare Friis constant in the default
/// parameter set. The received-power law fixes k only up to a constant;
/// this calibration puts cross-link interference powers into the
/// 1e-4..1e1 mW band that the contention-threshold sweep explores, so
/// threshold values are meaningful in milliwatts.
pub const FRIIS_CALIBRATION: f64 = 4e3;

/// Radio parameters. Defaults match the simulation parameter table:
/// P_t = 1000 mW, n = 2, rho = 1, eta = 0.5, W = 1200 MHz,
/// N_0 = -134 dBm/MHz, 60 GHz carrier, 30 degree half-power beamwidth,
/// k calibrated per [`FRIIS_CALIBRATION`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Transmission power in milliwatts.
    pub tx_power_mw: f64,
    /// Path loss exponent.
    pub path_loss_exp: f64,
    /// Multi-user interference factor applied to cross-link power.
    pub mui_factor: f64,
    /// Transceiver efficiency factor in (0, 1).
    pub efficiency: f64,
    /// System bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density in milliwatts per Hz.
    pub noise_mw_per_hz: f64,
    /// Carrier wavelength in meters.
    pub wavelength_m: f64,
    /// Friis constant; derived as (wavelength / 4 pi)^2 when absent.
    pub k_factor: Option<f64>,
    /// Half-power beamwidth in degrees.
    pub beamwidth_deg: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        let wavelength_m = 3e8 / 60e9;
        let bare = (wavelength_m / (4.0 * std::f64::consts::PI)).powi(2);
        ChannelParams {
            tx_power_mw: 1000.0,
            path_loss_exp: 2.0,
            mui_factor: 1.0,
            efficiency: 0.5,
            bandwidth_hz: 1.2e9,
            noise_mw_per_hz: 10f64.powf(-134.0 / 10.0) / 1e6,
            wavelength_m,
            k_factor: Some(bare * FRIIS_CALIBRATION),
            beamwidth_deg: 30.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_mw", self.tx_power_mw),
            ("path_loss_exp", self.path_loss_exp),
            ("bandwidth_hz", self.bandwidth_hz),
            ("wavelength_m", self.wavelength_m),
            ("beamwidth_deg", self.beamwidth_deg),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.mui_factor) {
            return Err(Error::InvalidParameter(
                "mui_factor must lie in [0, 1]".into(),
            ));
        }
        if !(self.efficiency > 0.0 && self.efficiency < 1.0) {
            return Err(Error::InvalidParameter(
                "efficiency must lie in (0, 1)".into(),
            ));
        }
        if self.noise_mw_per_hz < 0.0 {
            return Err(Error::InvalidParameter(
                "noise density cannot be negative".into(),
            ));
        }
        if let Some(k) = self.k_factor {
            if k <= 0.0 {
                return Err(Error::InvalidParameter("k_factor must be positive".into()));
            }
        }
        Ok(())
    }

    /// The constant k in the received-power law.
    pub fn friis_factor(&self) -> f64 {
        self.k_factor
            .unwrap_or_else(|| (self.wavelength_m / (4.0 * std::f64::consts::PI)).powi(2))
    }
}

/// Total thermal noise N_0 * W in milliwatts.
pub fn noise_power(params: &ChannelParams) -> f64 {
    params.noise_mw_per_hz * params.bandwidth_hz
}

/// Shannon rate in bits/second given signal and total noise-plus-interference.
pub fn shannon_rate(efficiency: f64, bandwidth_hz: f64, signal_mw: f64, denom_mw: f64) -> f64 {
    efficiency * bandwidth_hz * (1.0 + signal_mw / denom_mw).log2()
}

/// Piecewise main-lobe/side-lobe gain pattern of a steerable antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    /// Half-power beamwidth in degrees.
    pub beamwidth_deg: f64,
    /// Maximum gain G_0 in dB.
    pub g0_db: f64,
    /// Main lobe width in degrees (2.6 times the beamwidth).
    pub main_lobe_deg: f64,
    /// Side lobe gain in dB.
    pub side_lobe_db: f64,
}

impl AntennaPattern {
    pub fn new(beamwidth_deg: f64) -> Self {
        let g0_db = 10.0 * ((1.6162 / (beamwidth_deg / 2.0).to_radians().sin()).powi(2)).log10();
        AntennaPattern {
            beamwidth_deg,
            g0_db,
            main_lobe_deg: 2.6 * beamwidth_deg,
            side_lobe_db: -0.4111 * beamwidth_deg.ln() - 10.579,
        }
    }

    /// Gain in dB at `theta` degrees off boresight.
    pub fn gain_db(&self, theta_deg: f64) -> Result<f64> {
        if !(0.0..=180.0).contains(&theta_deg) {
            return Err(Error::AngleOutOfRange(theta_deg));
        }
        if theta_deg <= self.main_lobe_deg / 2.0 {
            Ok(self.g0_db - 3.01 * (2.0 * theta_deg / self.beamwidth_deg).powi(2))
        } else {
            Ok(self.side_lobe_db)
        }
    }

    /// Gain as a linear factor.
    pub fn gain_linear(&self, theta_deg: f64) -> Result<f64> {
        Ok(10f64.powf(self.gain_db(theta_deg)? / 10.0))
    }
}

/// Linear antenna gain at `theta` degrees off boresight.
pub fn antenna_gain(pattern: &AntennaPattern, theta_deg: f64) -> Result<f64> {
    pattern.gain_linear(theta_deg)
}

/// A transmission from `tx` to `rx`; both ends boresight at each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedLink {
    pub tx: NodeId,
    pub rx: NodeId,
}

impl DirectedLink {
    pub fn new(tx: NodeId, rx: NodeId) -> Self {
        DirectedLink { tx, rx }
    }

    pub fn shares_node(&self, other: &DirectedLink) -> bool {
        self.tx == other.tx || self.tx == other.rx || self.rx == other.tx || self.rx == other.rx
    }
}

/// Angle in degrees between the boresight of a node (toward `target`) and
/// the direction to `other`, clamped to [0, 180]. Degenerate zero-length
/// directions count as aligned.
fn offset_angle_deg(at: Position, target: Position, other: Position) -> f64 {
    let (ux, uy) = (target.x - at.x, target.y - at.y);
    let (vx, vy) = (other.x - at.x, other.y - at.y);
    let nu = ux.hypot(uy);
    let nv = vx.hypot(vy);
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let cos = ((ux * vx + uy * vy) / (nu * nv)).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Radio geometry bound to one scenario: parameters, node positions and the
/// set of obstructed base-station pairs.
#[derive(Debug, Clone)]
pub struct LinkModel<'a> {
    pub params: &'a ChannelParams,
    pub topology: &'a Topology,
    pattern: AntennaPattern,
    blocked: BTreeSet<(NodeId, NodeId)>,
    noise_mw: f64,
    k: f64,
}

impl<'a> LinkModel<'a> {
    pub fn new(
        params: &'a ChannelParams,
        topology: &'a Topology,
        blocked: BTreeSet<(NodeId, NodeId)>,
    ) -> Self {
        LinkModel {
            params,
            topology,
            pattern: AntennaPattern::new(params.beamwidth_deg),
            blocked,
            noise_mw: noise_power(params),
            k: params.friis_factor(),
        }
    }

    pub fn for_scenario(scenario: &'a Scenario) -> Self {
        LinkModel::new(
            &scenario.channel,
            &scenario.topology,
            scenario.blocked_pairs(),
        )
    }

    pub fn pattern(&self) -> &AntennaPattern {
        &self.pattern
    }

    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }

    pub fn is_blocked_pair(&self, a: NodeId, b: NodeId) -> bool {
        self.blocked.contains(&ordered_pair(a, b))
    }

    /// Power received at `rx` from `tx` while `tx` aims at `tx_target` and
    /// `rx` aims at `rx_target`. When the two point at each other this is
    /// the intended-signal power; otherwise the MUI factor applies. An
    /// obstructed pair receives nothing.
    pub fn received_power(
        &self,
        tx: NodeId,
        tx_target: NodeId,
        rx: NodeId,
        rx_target: NodeId,
    ) -> Result<f64> {
        let d = self.topology.distance_between(tx, rx);
        if d == 0.0 {
            return Err(Error::ZeroDistance { a: tx.0, b: rx.0 });
        }
        if self.is_blocked_pair(tx, rx) {
            return Ok(0.0);
        }
        let p_tx = self.topology.position(tx);
        let p_rx = self.topology.position(rx);
        let g_t = self.pattern.gain_linear(offset_angle_deg(
            p_tx,
            self.topology.position(tx_target),
            p_rx,
        ))?;
        let g_r = self.pattern.gain_linear(offset_angle_deg(
            p_rx,
            self.topology.position(rx_target),
            p_tx,
        ))?;
        let intended = tx_target == rx && rx_target == tx;
        let rho = if intended {
            1.0
        } else {
            self.params.mui_factor
        };
        Ok(rho * self.k * self.params.tx_power_mw * g_t * g_r * d.powf(-self.params.path_loss_exp))
    }

    /// Intended-signal power of a link (zero when the pair is obstructed).
    pub fn signal_power(&self, link: DirectedLink) -> Result<f64> {
        self.received_power(link.tx, link.rx, link.rx, link.tx)
    }

    /// Signal power ignoring blockage, used when rating a path as if its
    /// line of sight were clear.
    pub fn signal_power_unblocked(&self, a: NodeId, b: NodeId) -> Result<f64> {
        let d = self.topology.distance_between(a, b);
        if d == 0.0 {
            return Err(Error::ZeroDistance { a: a.0, b: b.0 });
        }
        let g0 = self.pattern.gain_linear(0.0)?;
        Ok(self.k * self.params.tx_power_mw * g0 * g0 * d.powf(-self.params.path_loss_exp))
    }

    /// Cross-link power from `from`'s transmitter into `victim`'s receiver,
    /// each antenna trained on its own peer.
    pub fn interference_power(&self, from: DirectedLink, victim: DirectedLink) -> Result<f64> {
        self.received_power(from.tx, from.rx, victim.rx, victim.tx)
    }

    /// Rate of `link` in a slot shared with `concurrent` links. The caller
    /// guarantees `link` is node-disjoint from every concurrent link.
    pub fn slot_rate(&self, link: DirectedLink, concurrent: &[DirectedLink]) -> Result<f64> {
        let signal = self.signal_power(link)?;
        let mut denom = self.noise_mw;
        for other in concurrent {
            denom += self.interference_power(*other, link)?;
        }
        Ok(shannon_rate(
            self.params.efficiency,
            self.params.bandwidth_hz,
            signal,
            denom,
        ))
    }

    /// Interference-free rate of a link.
    pub fn free_rate(&self, link: DirectedLink) -> Result<f64> {
        self.slot_rate(link, &[])
    }

    /// Interference-free rate between two nodes ignoring blockage.
    pub fn free_rate_unblocked(&self, a: NodeId, b: NodeId) -> Result<f64> {
        let signal = self.signal_power_unblocked(a, b)?;
        Ok(shannon_rate(
            self.params.efficiency,
            self.params.bandwidth_hz,
            signal,
            self.noise_mw,
        ))
    }
}

/// One scheduled hop of a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopEntry {
    pub link: DirectedLink,
    pub signal_mw: f64,
    pub rate_free_bps: f64,
}

/// Precomputed signal powers per hop and pairwise interference powers for
/// every ordered hop pair. Values come from the same code path as
/// [`LinkModel::received_power`], so lookups equal direct recomputation.
#[derive(Debug, Clone)]
pub struct LinkBudget {
    num_flows: usize,
    efficiency: f64,
    bandwidth_hz: f64,
    noise_mw: f64,
    hops: Vec<Vec<HopEntry>>,
    // Dense (2F)^2 tables indexed by flow * 2 + hop.
    interference_mw: Vec<f64>,
    adjacent: Vec<bool>,
}

impl LinkBudget {
    /// `hop_links[f]` lists flow f's scheduled hops in path order; flows
    /// without a path contribute an empty list. Paths have at most two
    /// hops; the dense tables are sized for that.
    pub fn build(model: &LinkModel<'_>, hop_links: &[Vec<DirectedLink>]) -> Result<Self> {
        let num_flows = hop_links.len();
        let mut hops = Vec::with_capacity(num_flows);
        for (flow, links) in hop_links.iter().enumerate() {
            if links.len() > 2 {
                return Err(Error::InvalidParameter(format!(
                    "flow {flow} has {} hops; paths are at most two hops",
                    links.len()
                )));
            }
        }
        for links in hop_links {
            let mut entries = Vec::with_capacity(links.len());
            for &link in links {
                let signal_mw = model.signal_power(link)?;
                entries.push(HopEntry {
                    link,
                    signal_mw,
                    rate_free_bps: shannon_rate(
                        model.params.efficiency,
                        model.params.bandwidth_hz,
                        signal_mw,
                        model.noise_mw(),
                    ),
                });
            }
            hops.push(entries);
        }
        let side = num_flows * 2;
        let mut interference_mw = vec![0.0; side * side];
        let mut adjacent = vec![false; side * side];
        for (f, from_hops) in hops.iter().enumerate() {
            for (h, from) in from_hops.iter().enumerate() {
                for (g, victim_hops) in hops.iter().enumerate() {
                    if f == g {
                        continue;
                    }
                    for (k, victim) in victim_hops.iter().enumerate() {
                        let idx = (f * 2 + h) * side + (g * 2 + k);
                        if from.link.shares_node(&victim.link) {
                            adjacent[idx] = true;
                        } else {
                            interference_mw[idx] =
                                model.interference_power(from.link, victim.link)?;
                        }
                    }
                }
            }
        }
        Ok(LinkBudget {
            num_flows,
            efficiency: model.params.efficiency,
            bandwidth_hz: model.params.bandwidth_hz,
            noise_mw: model.noise_mw(),
            hops,
            interference_mw,
            adjacent,
        })
    }

    pub fn num_flows(&self) -> usize {
        self.num_flows
    }

    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn hops(&self, flow: FlowId) -> &[HopEntry] {
        &self.hops[flow]
    }

    pub fn entry(&self, flow: FlowId, hop: usize) -> Option<&HopEntry> {
        self.hops[flow].get(hop)
    }

    fn idx(&self, from: (FlowId, usize), victim: (FlowId, usize)) -> usize {
        (from.0 * 2 + from.1) * self.num_flows * 2 + victim.0 * 2 + victim.1
    }

    /// Interference power from one hop's transmitter into another hop's
    /// receiver; zero for hops of the same flow or node-sharing pairs.
    pub fn interference_between(&self, from: (FlowId, usize), victim: (FlowId, usize)) -> f64 {
        if from.0 == victim.0 {
            return 0.0;
        }
        self.interference_mw[self.idx(from, victim)]
    }

    pub fn links_share_node(&self, a: (FlowId, usize), b: (FlowId, usize)) -> bool {
        if a.0 == b.0 {
            return true;
        }
        self.adjacent[self.idx(a, b)]
    }

    pub fn rate_free(&self, flow: FlowId, hop: usize) -> f64 {
        self.hops[flow][hop].rate_free_bps
    }

    /// Actual rate of `(flow, hop)` in a slot where `active` lists every
    /// scheduled hop (the victim itself may be included; it is skipped).
    pub fn rate_with(&self, flow: FlowId, hop: usize, active: &[(FlowId, usize)]) -> f64 {
        let entry = &self.hops[flow][hop];
        let mut denom = self.noise_mw;
        for &(g, k) in active {
            if g != flow {
                denom += self.interference_mw[self.idx((g, k), (flow, hop))];
            }
        }
        shannon_rate(self.efficiency, self.bandwidth_hz, entry.signal_mw, denom)
    }

    /// Largest cross-link interference power over all node-disjoint hop pairs.
    pub fn max_pairwise_interference(&self) -> f64 {
        self.interference_mw.iter().copied().fold(0.0, f64::max)
    }
}
