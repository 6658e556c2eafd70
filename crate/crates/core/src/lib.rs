//! Budgeted crowdsensing recruitment as a combinatorial bandit reverse
//! auction.
//!
//! Workers have unknown sensing rates (the probability they really perform a
//! task). The platform learns them from supervised rounds checked against
//! employee-collected ground truth, then runs repeated reverse auctions that
//! rank workers by UCB-weighted quality per unit bid and pay critical
//! payments, verifying reports against estimated truth as it goes.
//!
//! Modules, bottom-up:
//!
//! * [`world`] hidden environment and worker behavior
//! * [`bandit`] learned profiles and the trusted set
//! * [`truth`] the three verification tiers
//! * [`auction`] the mechanism itself
//! * [`baselines`] Random and ε-Greedy
//! * [`metrics`] post-run measures against hidden state
//! * [`harness`] experiments and CSV output

pub mod auction;
pub mod bandit;
pub mod baselines;
pub mod config;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod trace;
pub mod truth;
pub mod types;
pub mod world;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use types::{TaskId, WorkerId};
pub use world::World;
