//! Best-arm identification and regret minimisation for multi-armed bandits.
//!
//! The centrepiece is BoBW-lil'UCB(γ), an index policy whose single
//! parameter γ trades cumulative regret against the probability of
//! recommending a wrong arm. Around it the crate provides:
//!
//! - baseline policies ([`policy`]),
//! - closed-form regret and failure bounds ([`theory`]),
//! - lower-bound instance families ([`hard_instances`]),
//! - a seeded, parallel Monte-Carlo harness ([`harness`]),
//! - loaders for rating and assay tables ([`data`]).

pub mod data;
pub mod error;
pub mod hard_instances;
pub mod harness;
pub mod instance;
pub mod policy;
pub mod rng;
pub mod theory;

pub use error::{BanditError, Result};
pub use instance::{
    gap_profile, hardness, sample_reward, ArmModel, GapProfile, Hardness, StochasticInstance,
};
pub use policy::{policy_init, BanditPolicy, PolicyParams, PolicyState};
pub use rng::{RngStream, StreamLane};
