//! Slot-level simulator for relay-assisted, QoS-aware concurrent
//! transmission scheduling in mmWave wireless backhaul networks.
//!
//! Base stations form a mesh of directional 60 GHz links. Each superframe,
//! every flow brings a minimum-throughput demand; blocked flows can only be
//! served over a two-hop relay path. The crate models the radio (antenna
//! pattern, received power, SINR rates), selects relays for blocked flows,
//! schedules concurrent transmissions slot by slot under half-duplex and
//! interference constraints, and measures how many flows meet their demand.
//!
//! The pieces compose like this:
//!
//! - [`model`] generates topologies, flows and frame timing from a seed.
//! - [`channel`] turns geometry into gains, powers and Shannon rates.
//! - [`relay`] picks non-repeating relays for blocked flows.
//! - [`contention`] builds the conflict graph scheduling works on.
//! - [`scheduler`] runs the slot loop and checks schedule feasibility.
//! - [`baselines`] provides the comparison schemes.
//! - [`oracle`] solves tiny instances exactly to bound the heuristic gap.
//! - [`harness`] runs seeded Monte Carlo sweeps and writes CSV datasets.
//!
//! # Example
//!
//! ```
//! use backhaul_sim::baselines::{run_scheme, SchemeId};
//! use backhaul_sim::harness::{build_scenario, BaseParams};
//!
//! let base = BaseParams::default();
//! let scenario = build_scenario(&base, 42, 5).unwrap();
//! let outcome = run_scheme(SchemeId::Raqs, &scenario, 0.01, 0.53, 7).unwrap();
//! assert!(outcome.metrics.completed_flows <= scenario.flows.len());
//! ```
//!
//! Runnable walkthroughs live in `examples/`; `cargo run --example
//! compare_schemes` is a good place to start. The `backhaul-sim` binary
//! exposes the same machinery as a small CLI.

pub mod baselines;
pub mod channel;
pub mod contention;
mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod relay;
pub mod scheduler;

pub use error::{Error, Result};
