//! Fairness-constrained stochastic bandit optimization.
//!
//! The content-selection distribution `p` over `k` arms is restricted to the
//! fair polytope: for every group `G_i` of arms the probability mass
//! `sum_{a in G_i} p_a` must stay within `[lower_i, upper_i]`. This crate holds
//! the allocation-only core:
//!
//! * [`constraints`]: group structures, bounds, the polytope and metric
//!   translations (x% rule, lift, risk difference).
//! * [`lp`]: exact `argmax_{p in C} mu^T p` oracles (partition greedy,
//!   laminar greedy, brute-force vertex enumeration), the vertex gap and a
//!   default interior point.
//! * [`bandit`]: L1-OFUL and Constrained-epsilon-Greedy learners.
//! * [`baselines`]: Naive, Ran, Unc and Opt comparison policies.
//! * [`env`]: reward models (synthetic two-group, ratings-derived).
//! * [`sim`] and [`metrics`]: the select/sample/reward/update loop and the
//!   summary statistics computed over its traces.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bandit;
pub mod baselines;
pub mod constraints;
pub mod env;
mod error;
pub mod lp;
pub mod metrics;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};

/// Absolute tolerance used when checking probabilities at API boundaries.
pub const TOL: f64 = 1e-9;

/// Absolute tolerance used for internal floating point bookkeeping.
pub const EPS: f64 = 1e-12;
