//! Constrained epsilon-greedy.
//!
//! Per-arm empirical means drive one LP call per round; the greedy fair
//! distribution is mixed with a fixed anchor `q_f` whose max-norm ball of
//! radius `eta` lies in the polytope. The mixture stays fair by convexity
//! and keeps every arm in the anchor's support explored.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::lp::LpOracle;
use crate::{Error, Result, TOL};

/// Exploration probability per round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSchedule {
    /// `min(1, 4 / (eta d^2 t))` with `d = min(gamma_lower_bound, 1/2)`.
    Theoretical { eta: f64, gamma_lower_bound: f64 },
    /// `min(1, c / t)`.
    Experimental { c: f64 },
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::Experimental { c: 10.0 }
    }
}

impl EpsilonSchedule {
    pub fn check(&self) -> Result<()> {
        match *self {
            EpsilonSchedule::Theoretical {
                eta,
                gamma_lower_bound,
            } => {
                if !(eta > 0.0) {
                    return Err(Error::Config(
                        "the theoretical epsilon schedule needs eta > 0; use the experimental \
                         schedule or supply an anchor with a nonempty interior"
                            .into(),
                    ));
                }
                if !(gamma_lower_bound > 0.0) {
                    return Err(Error::Config(format!(
                        "gamma lower bound must be positive, got {gamma_lower_bound}"
                    )));
                }
            }
            EpsilonSchedule::Experimental { c } => {
                if !(c > 0.0) {
                    return Err(Error::Config(format!("schedule constant must be positive, got {c}")));
                }
            }
        }
        Ok(())
    }

    /// `epsilon_t` for round `t >= 1`.
    pub fn epsilon(&self, t: u64) -> f64 {
        let t = t.max(1) as f64;
        match *self {
            EpsilonSchedule::Theoretical {
                eta,
                gamma_lower_bound,
            } => {
                let d = gamma_lower_bound.min(0.5);
                (4.0 / (eta * d * d * t)).min(1.0)
            }
            EpsilonSchedule::Experimental { c } => (c / t).min(1.0),
        }
    }
}

/// Checked form of [`EpsilonSchedule::epsilon`].
pub fn epsilon_schedule(t: u64, schedule: &EpsilonSchedule) -> Result<f64> {
    if t == 0 {
        return Err(Error::Domain("rounds are numbered from 1".into()));
    }
    schedule.check()?;
    Ok(schedule.epsilon(t))
}

#[derive(Debug, Clone)]
pub struct EpsGreedyState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    mu_bar: Vec<f64>,
    t: u64,
    anchor: Vec<f64>,
    eta: f64,
    schedule: EpsilonSchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsChoice {
    /// `(1 - epsilon) greedy + epsilon q_f`, the distribution to sample from.
    pub sampling: Vec<f64>,
    /// `argmax_{p in C} mu_bar^T p`.
    pub greedy: Vec<f64>,
    pub epsilon: f64,
}

impl EpsGreedyState {
    /// `anchor` must be a fair distribution; `eta` its interior radius.
    pub fn new(anchor: Vec<f64>, eta: f64, schedule: EpsilonSchedule) -> Result<Self> {
        schedule.check()?;
        let sum: f64 = anchor.iter().sum();
        if anchor.is_empty() || (sum - 1.0).abs() > TOL || anchor.iter().any(|&x| x < -TOL) {
            return Err(Error::NotNormalized { sum });
        }
        let k = anchor.len();
        Ok(Self {
            counts: vec![0; k],
            sums: vec![0.0; k],
            mu_bar: vec![0.0; k],
            t: 1,
            anchor,
            eta,
            schedule,
        })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Empirical means; arms never pulled read 0.
    pub fn mu_bar(&self) -> &[f64] {
        &self.mu_bar
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.schedule
    }

    pub fn epsilon(&self) -> f64 {
        self.schedule.epsilon(self.t)
    }

    pub fn select(&self, oracle: &dyn LpOracle) -> Result<EpsChoice> {
        let epsilon = self.epsilon();
        let greedy = oracle.solve(&self.mu_bar)?.p;
        let sampling = mix(&greedy, &self.anchor, epsilon);
        Ok(EpsChoice {
            sampling,
            greedy,
            epsilon,
        })
    }

    pub fn update(&mut self, arm: usize, r: f64) -> Result<()> {
        if arm >= self.k() {
            return Err(Error::Domain(format!("arm {arm} outside [0, {})", self.k())));
        }
        self.counts[arm] += 1;
        self.sums[arm] += r;
        self.mu_bar[arm] = self.sums[arm] / self.counts[arm] as f64;
        self.t += 1;
        Ok(())
    }

    /// Flat checkpoint record: `[t, k, counts (k), sums (k)]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 + 2 * self.k());
        out.push(self.t as f64);
        out.push(self.k() as f64);
        out.extend(self.counts.iter().map(|&c| c as f64));
        out.extend(self.sums.iter());
        out
    }

    pub fn from_flat(record: &[f64], anchor: Vec<f64>, eta: f64, schedule: EpsilonSchedule) -> Result<Self> {
        let mut s = Self::new(anchor, eta, schedule)?;
        let k = s.k();
        if record.len() != 2 + 2 * k || record[1] as usize != k || record[0] < 1.0 {
            return Err(Error::Config("malformed epsilon-greedy checkpoint record".into()));
        }
        s.t = record[0] as u64;
        for a in 0..k {
            s.counts[a] = record[2 + a] as u64;
            s.sums[a] = record[2 + k + a];
            if s.counts[a] > 0 {
                s.mu_bar[a] = s.sums[a] / s.counts[a] as f64;
            }
        }
        Ok(s)
    }
}

/// `(1 - epsilon) p + epsilon q`.
pub fn mix(p: &[f64], q: &[f64], epsilon: f64) -> Vec<f64> {
    p.iter()
        .zip(q)
        .map(|(a, b)| (1.0 - epsilon) * a + epsilon * b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{FairPolytope, FairnessBounds, GroupStructure};
    use crate::lp::oracle_for;

    fn four_arm() -> FairPolytope {
        FairPolytope::new(
            GroupStructure::partition_from_sizes(&[2, 2]).unwrap(),
            FairnessBounds::uniform(2, 0.25, 0.75).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn schedule_examples() {
        let th = EpsilonSchedule::Theoretical {
            eta: 0.25,
            gamma_lower_bound: 0.4,
        };
        // 4 / (0.25 * 0.16) = 100
        assert_eq!(epsilon_schedule(1, &th).unwrap(), 1.0);
        assert!((epsilon_schedule(1000, &th).unwrap() - 0.1).abs() < 1e-12);
        let ex = EpsilonSchedule::Experimental { c: 10.0 };
        assert_eq!(epsilon_schedule(20, &ex).unwrap(), 0.5);
        for t in 1..=10 {
            assert_eq!(epsilon_schedule(t, &ex).unwrap(), 1.0);
        }
        // d is capped at 1/2
        let big = EpsilonSchedule::Theoretical {
            eta: 1.0,
            gamma_lower_bound: 0.9,
        };
        assert!((big.epsilon(160) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn theoretical_schedule_needs_interior() {
        let th = EpsilonSchedule::Theoretical {
            eta: 0.0,
            gamma_lower_bound: 0.1,
        };
        assert!(matches!(epsilon_schedule(1, &th), Err(Error::Config(_))));
        assert!(EpsGreedyState::new(vec![0.25; 4], 0.0, th).is_err());
        assert!(epsilon_schedule(0, &EpsilonSchedule::default()).is_err());
    }

    #[test]
    fn first_round_samples_the_anchor() {
        let oracle = oracle_for(&four_arm()).unwrap();
        let s = EpsGreedyState::new(vec![0.25; 4], 0.125, EpsilonSchedule::default()).unwrap();
        let c = s.select(oracle.as_ref()).unwrap();
        assert_eq!(c.epsilon, 1.0);
        assert_eq!(c.sampling, vec![0.25; 4]);
    }

    #[test]
    fn mixture_example() {
        let p = [0.75, 0.0, 0.25, 0.0];
        let m = mix(&p, &[0.25; 4], 0.2);
        let want = [0.65, 0.05, 0.25, 0.05];
        for (a, b) in m.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(four_arm().contains(&m, 1e-9));
        assert_eq!(mix(&p, &[0.25; 4], 0.0), p.to_vec());
    }

    #[test]
    fn greedy_uses_empirical_means() {
        let oracle = oracle_for(&four_arm()).unwrap();
        let mut s = EpsGreedyState::new(vec![0.25; 4], 0.125, EpsilonSchedule::Experimental { c: 1.0 }).unwrap();
        s.update(2, 1.0).unwrap();
        let c = s.select(oracle.as_ref()).unwrap();
        assert_eq!(c.greedy, vec![0.25, 0.0, 0.75, 0.0]);
        assert_eq!(c.epsilon, 0.5);
    }

    #[test]
    fn update_examples() {
        let mut s = EpsGreedyState::new(vec![0.25; 4], 0.1, EpsilonSchedule::default()).unwrap();
        s.update(2, 1.0).unwrap();
        assert_eq!(s.mu_bar(), &[0.0, 0.0, 1.0, 0.0]);
        s.update(1, 1.0).unwrap();
        s.update(1, 0.0).unwrap();
        assert_eq!(s.mu_bar()[1], 0.5);
        assert_eq!(s.mu_bar()[0], 0.0);
        assert_eq!(s.counts().iter().sum::<u64>(), s.t() - 1);
        assert!(s.update(4, 1.0).is_err());
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut s = EpsGreedyState::new(vec![0.25; 4], 0.1, EpsilonSchedule::default()).unwrap();
        s.update(0, 1.0).unwrap();
        s.update(3, 0.5).unwrap();
        let r = EpsGreedyState::from_flat(&s.to_flat(), vec![0.25; 4], 0.1, EpsilonSchedule::default()).unwrap();
        assert_eq!(r.mu_bar(), s.mu_bar());
        assert_eq!(r.t(), 3);
    }
}
