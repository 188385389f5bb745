//! Link-level Monte-Carlo evaluation of cooperative interference
//! cancellation for a terrestrial uplink disturbed by a cellular-connected
//! UAV.
//!
//! BS1 serves UE1 on the resource block the UAV transmits on. Its first-tier
//! neighbors (the helpers) do not use that block and can assist BS1 either
//! by decoding and forwarding the UAV signal or by quantizing and forwarding
//! what they receive. [`cic`] holds the receiver mathematics, [`geometry`]
//! and [`channel`] produce the random channel draws, and [`montecarlo`]
//! averages achievable rates over seeded trials.

pub mod channel;
pub mod cic;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod montecarlo;

pub use cic::{LinkRealization, Scheme, SchemeOutcome};
pub use config::ScenarioConfig;
pub use montecarlo::{run_trials, sweep, Execution, SweepResult, SweepVariable};
