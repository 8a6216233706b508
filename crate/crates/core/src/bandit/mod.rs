//! The two fair learners and the policy interface shared with the baselines.

mod eps;
mod oful;
mod sampling;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use eps::{epsilon_schedule, mix, EpsChoice, EpsGreedyState, EpsilonSchedule};
pub use oful::{ConfidenceBall, OfulChoice, OfulConfig, OfulState};
pub use sampling::sample_arm;

use crate::lp::LpOracle;
use crate::Result;

/// What a policy plays in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// The distribution the arm is sampled from.
    pub distribution: Vec<f64>,
    /// Exploration probability, for epsilon-greedy.
    pub epsilon: Option<f64>,
}

/// A per-context learner or fixed rule driven by the simulation loop.
pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn decide(&mut self) -> Result<Decision>;

    /// Feedback for the round just decided.
    fn observe(&mut self, decision: &Decision, arm: usize, reward: f64) -> Result<()>;

    /// LP oracle calls made so far.
    fn lp_calls(&self) -> u64;
}

/// L1-OFUL constrained to the oracle's polytope.
pub struct OfulPolicy {
    name: &'static str,
    state: OfulState,
    oracle: Box<dyn LpOracle>,
    lp_calls: u64,
}

impl OfulPolicy {
    pub fn new(name: &'static str, state: OfulState, oracle: Box<dyn LpOracle>) -> Self {
        Self {
            name,
            state,
            oracle,
            lp_calls: 0,
        }
    }

    pub fn state(&self) -> &OfulState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut OfulState {
        &mut self.state
    }

    pub fn choose(&mut self) -> Result<OfulChoice> {
        let c = self.state.select(self.oracle.as_ref())?;
        self.lp_calls += c.lp_calls;
        Ok(c)
    }
}

impl Policy for OfulPolicy {
    fn name(&self) -> &'static str {
        self.name
    }

    fn decide(&mut self) -> Result<Decision> {
        Ok(Decision {
            distribution: self.choose()?.p,
            epsilon: None,
        })
    }

    fn observe(&mut self, decision: &Decision, _arm: usize, reward: f64) -> Result<()> {
        self.state.update(&decision.distribution, reward)
    }

    fn lp_calls(&self) -> u64 {
        self.lp_calls
    }
}

/// Constrained epsilon-greedy.
pub struct EpsGreedyPolicy {
    state: EpsGreedyState,
    oracle: Box<dyn LpOracle>,
    lp_calls: u64,
}

impl EpsGreedyPolicy {
    pub fn new(state: EpsGreedyState, oracle: Box<dyn LpOracle>) -> Self {
        Self {
            state,
            oracle,
            lp_calls: 0,
        }
    }

    pub fn state(&self) -> &EpsGreedyState {
        &self.state
    }

    pub fn choose(&mut self) -> Result<EpsChoice> {
        self.lp_calls += 1;
        self.state.select(self.oracle.as_ref())
    }
}

impl Policy for EpsGreedyPolicy {
    fn name(&self) -> &'static str {
        "fair-eps"
    }

    fn decide(&mut self) -> Result<Decision> {
        let c = self.choose()?;
        Ok(Decision {
            distribution: c.sampling,
            epsilon: Some(c.epsilon),
        })
    }

    fn observe(&mut self, _decision: &Decision, arm: usize, reward: f64) -> Result<()> {
        self.state.update(arm, reward)
    }

    fn lp_calls(&self) -> u64 {
        self.lp_calls
    }
}
