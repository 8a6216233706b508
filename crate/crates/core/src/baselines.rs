//! Comparison policies: Naive, Ran, Unc and Opt.
//!
//! Naive and Ran are sampling procedures; here they are expressed through the
//! distributions they induce so they share the simulation loop with the
//! learners.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bandit::{Decision, OfulConfig, OfulPolicy, OfulState, Policy};
use crate::constraints::{validate, FairPolytope, StructureClass};
use crate::lp::oracle_for;
use crate::{Error, Result, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Naive,
    Ran,
    Unc,
    Opt,
}

fn require_partition(polytope: &FairPolytope) -> Result<()> {
    let class = polytope.structure().class();
    if class != StructureClass::Partition {
        return Err(Error::StructureClass {
            expected: StructureClass::Partition,
            found: class,
        });
    }
    validate(polytope).into_result()
}

/// Spreads `amount` uniformly over arms, capping each group's share at
/// `caps[i]`; overflow from capped groups is re-spread over the rest.
/// Returns the mass assigned to each group.
fn water_fill(sizes: &[usize], caps: &[f64], amount: f64) -> Result<Vec<f64>> {
    let g = sizes.len();
    let mut capped = vec![false; g];
    loop {
        let fixed: f64 = (0..g).filter(|&i| capped[i]).map(|i| caps[i]).sum();
        let free_arms: usize = (0..g).filter(|&i| !capped[i]).map(|i| sizes[i]).sum();
        if free_arms == 0 {
            if amount > fixed + EPS {
                return Err(Error::Infeasible(format!(
                    "upper bounds leave {} of the mass unassigned",
                    amount - fixed
                )));
            }
            return Ok(caps.to_vec());
        }
        let share = ((amount - fixed) / free_arms as f64).max(0.0);
        let mut changed = false;
        for i in 0..g {
            if !capped[i] && share * sizes[i] as f64 > caps[i] + EPS {
                capped[i] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok((0..g)
                .map(|i| if capped[i] { caps[i] } else { share * sizes[i] as f64 })
                .collect());
        }
    }
}

/// Completes `base` (already placed mass per arm) to a fair distribution the
/// way Naive would: unmet lower bounds first, spread evenly inside each
/// group, then the rest evenly over all arms under the upper bounds.
fn naive_completion(polytope: &FairPolytope, base: &[f64]) -> Result<Vec<f64>> {
    let s = polytope.structure();
    let groups = s.groups();
    let mass = s.group_mass(base)?;
    let mut p = base.to_vec();
    let mut deficit_total = 0.0;
    let mut caps = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        let deficit = (polytope.lower()[i] - mass[i]).max(0.0);
        let share = deficit / g.len() as f64;
        for &a in g {
            p[a] += share;
        }
        deficit_total += deficit;
        caps.push((polytope.upper()[i] - mass[i] - deficit).max(0.0));
    }
    let placed: f64 = base.iter().sum::<f64>() + deficit_total;
    let residual = 1.0 - placed;
    if residual < -EPS {
        return Err(Error::Infeasible(format!(
            "lower bounds need {placed} of the mass"
        )));
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let fill = water_fill(&sizes, &caps, residual.max(0.0))?;
    for (i, g) in groups.iter().enumerate() {
        let share = fill[i] / g.len() as f64;
        for &a in g {
            p[a] += share;
        }
    }
    Ok(p)
}

/// Distribution induced by Naive: with probability `lower_i` a uniform arm
/// of `G_i`, otherwise a uniform arm of `[k]` subject to the upper bounds.
pub fn naive_distribution(polytope: &FairPolytope) -> Result<Vec<f64>> {
    require_partition(polytope)?;
    naive_completion(polytope, &vec![0.0; polytope.k()])
}

/// `1 - theta - sum_i max(0, lower_i - theta m_i)`: mass left after scaling
/// the unconstrained distribution by `theta` and meeting every lower bound.
fn ran_slack(polytope: &FairPolytope, mass: &[f64], theta: f64) -> f64 {
    let deficit: f64 = polytope
        .lower()
        .iter()
        .zip(mass)
        .map(|(l, m)| (l - theta * m).max(0.0))
        .sum();
    1.0 - theta - deficit
}

/// Largest `theta` for which `theta p_unc` fits under every upper bound and
/// the remaining `1 - theta` can still meet every lower bound.
pub fn ran_theta(p_unc: &[f64], polytope: &FairPolytope) -> Result<f64> {
    require_partition(polytope)?;
    let mass = polytope.structure().group_mass(p_unc)?;
    let mut hi: f64 = 1.0;
    for (m, u) in mass.iter().zip(polytope.upper()) {
        if *m > 0.0 {
            hi = hi.min(u / m);
        }
    }
    // half the completion's tolerance, so an accepted theta always completes
    let tol = 0.5 * EPS;
    if ran_slack(polytope, &mass, hi) >= -tol {
        return Ok(hi);
    }
    // the slack is concave in theta and nonnegative at 0
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ran_slack(polytope, &mass, mid) >= -tol {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(lo)
}

/// Ran: `theta p_unc` plus a Naive-style completion of the remaining mass.
pub fn ran_distribution(p_unc: &[f64], polytope: &FairPolytope) -> Result<(f64, Vec<f64>)> {
    let theta = ran_theta(p_unc, polytope)?;
    let base: Vec<f64> = p_unc.iter().map(|x| theta * x).collect();
    Ok((theta, naive_completion(polytope, &base)?))
}

/// The best fair distribution for known means.
pub fn opt_distribution(mu_star: &[f64], polytope: &FairPolytope) -> Result<Vec<f64>> {
    Ok(oracle_for(polytope)?.solve(mu_star)?.p)
}

/// L1-OFUL over the whole simplex.
pub fn unc_policy(k: usize, config: OfulConfig) -> Result<OfulPolicy> {
    let simplex = FairPolytope::unconstrained(k)?;
    Ok(OfulPolicy::new("unc", OfulState::new(k, config)?, oracle_for(&simplex)?))
}

/// Plays the same distribution every round.
pub struct FixedPolicy {
    name: &'static str,
    distribution: Vec<f64>,
}

impl FixedPolicy {
    pub fn naive(polytope: &FairPolytope) -> Result<Self> {
        Ok(Self {
            name: "naive",
            distribution: naive_distribution(polytope)?,
        })
    }

    pub fn opt(mu_star: &[f64], polytope: &FairPolytope) -> Result<Self> {
        Ok(Self {
            name: "opt",
            distribution: opt_distribution(mu_star, polytope)?,
        })
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }
}

impl Policy for FixedPolicy {
    fn name(&self) -> &'static str {
        self.name
    }

    fn decide(&mut self) -> Result<Decision> {
        Ok(Decision {
            distribution: self.distribution.clone(),
            epsilon: None,
        })
    }

    fn observe(&mut self, _: &Decision, _: usize, _: f64) -> Result<()> {
        Ok(())
    }

    fn lp_calls(&self) -> u64 {
        0
    }
}

/// Unconstrained L1-OFUL made fair after the fact by [`ran_distribution`].
/// The learner is updated with the distribution actually played.
pub struct RanPolicy {
    inner: OfulPolicy,
    polytope: FairPolytope,
    last_theta: f64,
}

impl RanPolicy {
    pub fn new(polytope: &FairPolytope, config: OfulConfig) -> Result<Self> {
        require_partition(polytope)?;
        Ok(Self {
            inner: unc_policy(polytope.k(), config)?,
            polytope: polytope.clone(),
            last_theta: 1.0,
        })
    }

    pub fn last_theta(&self) -> f64 {
        self.last_theta
    }
}

impl Policy for RanPolicy {
    fn name(&self) -> &'static str {
        "ran"
    }

    fn decide(&mut self) -> Result<Decision> {
        let p_unc = self.inner.choose()?.p;
        let (theta, distribution) = ran_distribution(&p_unc, &self.polytope)?;
        self.last_theta = theta;
        Ok(Decision {
            distribution,
            epsilon: None,
        })
    }

    fn observe(&mut self, decision: &Decision, arm: usize, reward: f64) -> Result<()> {
        self.inner.observe(decision, arm, reward)
    }

    fn lp_calls(&self) -> u64 {
        self.inner.lp_calls()
    }
}

/// Boxed policy for a baseline.
pub fn baseline_policy(
    kind: BaselineKind,
    polytope: &FairPolytope,
    mu_star: &[f64],
    config: OfulConfig,
) -> Result<Box<dyn Policy>> {
    Ok(match kind {
        BaselineKind::Naive => Box::new(FixedPolicy::naive(polytope)?),
        BaselineKind::Opt => Box::new(FixedPolicy::opt(mu_star, polytope)?),
        BaselineKind::Unc => Box::new(unc_policy(polytope.k(), config)?),
        BaselineKind::Ran => Box::new(RanPolicy::new(polytope, config)?),
    })
}
