//! Bootstrapped exploration for stochastic bandits.
//!
//! This crate implements the two bootstrap-based exploration strategies for
//! multi-armed and contextual bandits — non-parametric bootstrapping (NPB)
//! and weighted bootstrapping (WB) — next to the baselines they are measured
//! against (Beta-posterior Thompson sampling, ε-greedy, LinUCB, linear
//! Thompson sampling). It also ships:
//!
//! - exact probability oracles (binomial tails, Bernoulli KL) and numeric
//!   checks for the supporting lemmas behind the NPB lower bound and the
//!   forced-exploration upper bound ([`theory`]),
//! - reward environments for bounded-reward bandits and one-vs-all
//!   contextual classification ([`env`]),
//! - a seeded, replicated simulation harness that produces regret and
//!   per-step-reward traces ([`sim`]).
//!
//! All stochasticity flows through [`dist::RngStream`], so every experiment
//! replays bit-exactly from a master seed.

pub mod ctx;
pub mod dist;
pub mod env;
pub mod error;
pub mod policy;
pub mod sim;
pub mod theory;

pub use error::{Error, Result};

// Matrix types used in public signatures (`ctx`, `policy::wb_gaussian_sample`).
pub use nalgebra;
