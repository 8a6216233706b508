use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_mu, dot, rank_arms, LpOracle, LpSolution, SolverTag};
use crate::constraints::{tighten_laminar, validate, FairPolytope};
use crate::{Error, Result, EPS};

/// Greedy solver for laminar families (partitions included).
///
/// Works on tightened bounds. Lower bounds are met bottom-up: every group
/// tops its subtree up to its lower bound by pouring mass onto its best arms.
/// The remaining mass is then poured onto the globally best arms. Pouring
/// onto an arm stops as soon as some group containing it reaches its upper
/// bound; that group's arms are skipped from then on.
#[derive(Debug, Clone)]
pub struct LaminarGreedy {
    k: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    postorder: Vec<usize>,
    chains: Vec<Vec<usize>>,
}

impl LaminarGreedy {
    pub fn new(polytope: &FairPolytope) -> Result<Self> {
        let tight = tighten_laminar(polytope)?;
        validate(&tight).into_result()?;
        let forest = tight.structure().laminar_forest()?;
        Ok(Self {
            k: tight.k(),
            lower: tight.lower().to_vec(),
            upper: tight.upper().to_vec(),
            postorder: forest.postorder,
            chains: forest.chains,
        })
    }

    /// Pours `amount` onto the best arms of `node`'s subtree (all arms when
    /// `node` is `None`) without exceeding any upper bound.
    fn pour(
        &self,
        node: Option<usize>,
        mut amount: f64,
        order: &[usize],
        p: &mut [f64],
        mass: &mut [f64],
    ) -> Result<()> {
        for &a in order {
            if amount <= EPS {
                return Ok(());
            }
            let chain = &self.chains[a];
            if let Some(n) = node {
                if !chain.contains(&n) {
                    continue;
                }
            }
            let headroom = chain
                .iter()
                .map(|&j| self.upper[j] - mass[j])
                .fold(f64::INFINITY, f64::min);
            if headroom <= EPS {
                continue;
            }
            let add = amount.min(headroom);
            p[a] += add;
            for &j in chain {
                mass[j] += add;
            }
            amount -= add;
        }
        if amount > EPS {
            return Err(Error::Infeasible(format!(
                "upper bounds leave {amount} of the mass unassigned"
            )));
        }
        Ok(())
    }
}

impl LpOracle for LaminarGreedy {
    fn solve(&self, mu: &[f64]) -> Result<LpSolution> {
        check_mu(mu, self.k)?;
        let order = rank_arms(mu);
        let mut p = vec![0.0; self.k];
        let mut mass = vec![0.0; self.lower.len()];
        for &i in &self.postorder {
            let deficit = self.lower[i] - mass[i];
            if deficit > EPS {
                self.pour(Some(i), deficit, &order, &mut p, &mut mass)?;
            }
        }
        let placed: f64 = p.iter().sum();
        self.pour(None, 1.0 - placed, &order, &mut p, &mut mass)?;
        let objective = dot(mu, &p);
        Ok(LpSolution {
            p,
            objective,
            solver: SolverTag::LaminarGreedy,
        })
    }

    fn tag(&self) -> SolverTag {
        SolverTag::LaminarGreedy
    }

    fn k(&self) -> usize {
        self.k
    }
}

/// One-shot laminar greedy solve; tightens the bounds first.
pub fn solve_laminar_greedy(mu: &[f64], polytope: &FairPolytope) -> Result<LpSolution> {
    LaminarGreedy::new(polytope)?.solve(mu)
}
