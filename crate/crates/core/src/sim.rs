//! The select, sample, reward, update loop.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::bandit::{
    sample_arm, EpsGreedyPolicy, EpsGreedyState, EpsilonSchedule, OfulConfig, OfulPolicy, OfulState, Policy,
};
use crate::baselines::{baseline_policy, BaselineKind};
use crate::constraints::FairPolytope;
use crate::env::ArmModel;
use crate::lp::{compute_gamma, default_fair_point, oracle_for, FairPoint};
use crate::{Error, Result, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    FairOful,
    FairEps,
    Naive,
    Ran,
    Unc,
    Opt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::FairOful,
        Algorithm::FairEps,
        Algorithm::Naive,
        Algorithm::Ran,
        Algorithm::Unc,
        Algorithm::Opt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FairOful => "fair-oful",
            Algorithm::FairEps => "fair-eps",
            Algorithm::Naive => "naive",
            Algorithm::Ran => "ran",
            Algorithm::Unc => "unc",
            Algorithm::Opt => "opt",
        }
    }

    /// Whether every distribution it plays lies in the polytope.
    pub fn is_fair(self) -> bool {
        self != Algorithm::Unc
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Which exploration schedule epsilon-greedy uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleMode {
    /// `min(1, c / t)`.
    Experimental { c: f64 },
    /// `min(1, 4 / (eta d^2 t))`; `gamma_lower_bound` defaults to the true
    /// vertex gap of the context (brute force, small `k` only).
    Theoretical { gamma_lower_bound: Option<f64> },
}

impl Default for ScheduleMode {
    fn default() -> Self {
        ScheduleMode::Experimental { c: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub delta: f64,
    /// Defaults to `sqrt(k)`.
    pub sigma: Option<f64>,
    pub refresh_every: u64,
    pub schedule: ScheduleMode,
    /// Defaults to [`default_fair_point`].
    pub anchor: Option<FairPoint>,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            delta: 0.1,
            sigma: None,
            refresh_every: 1000,
            schedule: ScheduleMode::default(),
            anchor: None,
        }
    }
}

impl PolicyParams {
    pub fn oful_config(&self, k: usize) -> OfulConfig {
        let mut c = OfulConfig::for_arms(k, self.delta);
        if let Some(s) = self.sigma {
            c.sigma = s;
        }
        c.refresh_every = self.refresh_every;
        c
    }
}

/// Builds the policy for one context. `mu_star` is used only by Opt and by
/// the theoretical schedule's default gap.
pub fn build_policy(
    algorithm: Algorithm,
    polytope: &FairPolytope,
    mu_star: &[f64],
    params: &PolicyParams,
) -> Result<Box<dyn Policy>> {
    let k = polytope.k();
    if mu_star.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            found: mu_star.len(),
        });
    }
    let config = params.oful_config(k);
    Ok(match algorithm {
        Algorithm::FairOful => Box::new(OfulPolicy::new(
            "fair-oful",
            OfulState::new(k, config)?,
            oracle_for(polytope)?,
        )),
        Algorithm::FairEps => {
            let anchor = match &params.anchor {
                Some(a) => {
                    if !polytope.contains(&a.q, TOL) {
                        return Err(Error::Infeasible("the exploration anchor is not fair".into()));
                    }
                    a.clone()
                }
                None => default_fair_point(polytope)?,
            };
            let schedule = match params.schedule {
                ScheduleMode::Experimental { c } => EpsilonSchedule::Experimental { c },
                ScheduleMode::Theoretical { gamma_lower_bound } => {
                    let gamma = match gamma_lower_bound {
                        Some(g) => g,
                        None => compute_gamma(mu_star, polytope)?.gamma,
                    };
                    EpsilonSchedule::Theoretical {
                        eta: anchor.eta,
                        gamma_lower_bound: gamma,
                    }
                }
            };
            let state = EpsGreedyState::new(anchor.q, anchor.eta, schedule)?;
            Box::new(EpsGreedyPolicy::new(state, oracle_for(polytope)?))
        }
        Algorithm::Naive => baseline_policy(BaselineKind::Naive, polytope, mu_star, config)?,
        Algorithm::Ran => baseline_policy(BaselineKind::Ran, polytope, mu_star, config)?,
        Algorithm::Unc => baseline_policy(BaselineKind::Unc, polytope, mu_star, config)?,
        Algorithm::Opt => baseline_policy(BaselineKind::Opt, polytope, mu_star, config)?,
    })
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub context: usize,
    pub epsilon: Option<f64>,
    /// Group masses of the distribution played.
    pub masses: Vec<f64>,
    pub arm: usize,
    pub reward: f64,
    pub cum_reward: f64,
    /// `mu*^T p_opt - mu*^T p^t`.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub context: usize,
    pub records: Vec<TraceRecord>,
    /// `mu*^T p_opt`.
    pub opt_value: f64,
    pub lp_calls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec<'a> {
    pub algorithm: Algorithm,
    pub model: &'a ArmModel,
    pub polytope: &'a FairPolytope,
    pub context: usize,
    pub horizon: u64,
    pub params: &'a PolicyParams,
}

/// Runs `spec.horizon` rounds in one context. Incompatible configurations are
/// reported before the first round.
pub fn run_single<R: Rng + ?Sized>(spec: &RunSpec<'_>, rng: &mut R) -> Result<Trace> {
    if spec.horizon == 0 {
        return Err(Error::Config("the horizon must be at least 1".into()));
    }
    if spec.model.k() != spec.polytope.k() {
        return Err(Error::LengthMismatch {
            expected: spec.model.k(),
            found: spec.polytope.k(),
        });
    }
    let mu = spec.model.means(spec.context)?;
    let mut policy = build_policy(spec.algorithm, spec.polytope, mu, spec.params)?;
    let opt_value = oracle_for(spec.polytope)?.solve(mu)?.objective;
    let structure = spec.polytope.structure();
    let mut records = Vec::with_capacity(spec.horizon as usize);
    let mut cum = 0.0;
    for t in 1..=spec.horizon {
        let decision = policy.decide()?;
        let arm = sample_arm(&decision.distribution, rng)?;
        let reward = spec.model.draw_reward(spec.context, arm, rng)?;
        policy.observe(&decision, arm, reward)?;
        cum += reward;
        let expected: f64 = mu.iter().zip(&decision.distribution).map(|(m, p)| m * p).sum();
        records.push(TraceRecord {
            t,
            context: spec.context,
            epsilon: decision.epsilon,
            masses: structure.group_mass(&decision.distribution)?,
            arm,
            reward,
            cum_reward: cum,
            regret: opt_value - expected,
        });
    }
    Ok(Trace {
        algorithm: spec.algorithm,
        context: spec.context,
        records,
        opt_value,
        lp_calls: policy.lp_calls(),
    })
}

/// Identifier of a run inside a sweep, `algo/grid/rep/context`.
pub fn run_id(algorithm: Algorithm, grid: usize, rep: u64, context: usize) -> String {
    format!("{algorithm}/{grid}/{rep}/{context}")
}
