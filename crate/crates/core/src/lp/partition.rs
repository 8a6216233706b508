use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_mu, dot, LpOracle, LpSolution, SolverTag};
use crate::constraints::{validate, FairPolytope, StructureClass};
use crate::{Error, Result, EPS};

/// Greedy solver for partition structures.
///
/// Each group puts all of its mass on its best arm. Groups first receive
/// their lower bound; the remaining mass goes to groups in order of their
/// best arm's reward, each filled up to its upper bound.
#[derive(Debug, Clone)]
pub struct PartitionGreedy {
    k: usize,
    group_of: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartitionGreedy {
    pub fn new(polytope: &FairPolytope) -> Result<Self> {
        let s = polytope.structure();
        if s.class() != StructureClass::Partition {
            return Err(Error::StructureClass {
                expected: StructureClass::Partition,
                found: s.class(),
            });
        }
        validate(polytope).into_result()?;
        let mut group_of = vec![0; s.k()];
        for (i, g) in s.groups().iter().enumerate() {
            for &a in g {
                group_of[a] = i;
            }
        }
        Ok(Self {
            k: s.k(),
            group_of,
            lower: polytope.lower().to_vec(),
            upper: polytope.upper().to_vec(),
        })
    }
}

impl LpOracle for PartitionGreedy {
    fn solve(&self, mu: &[f64]) -> Result<LpSolution> {
        check_mu(mu, self.k)?;
        let g = self.lower.len();
        let mut best = vec![usize::MAX; g];
        for (a, &i) in self.group_of.iter().enumerate() {
            if best[i] == usize::MAX || mu[a] > mu[best[i]] {
                best[i] = a;
            }
        }
        let mut p = vec![0.0; self.k];
        let mut residual = 1.0;
        for i in 0..g {
            p[best[i]] = self.lower[i];
            residual -= self.lower[i];
        }
        let mut order: Vec<usize> = (0..g).collect();
        order.sort_by(|&x, &y| {
            mu[best[y]]
                .total_cmp(&mu[best[x]])
                .then(best[x].cmp(&best[y]))
        });
        for i in order {
            if residual <= EPS {
                break;
            }
            let add = (self.upper[i] - self.lower[i]).min(residual).max(0.0);
            p[best[i]] += add;
            residual -= add;
        }
        if residual > EPS {
            return Err(Error::Infeasible(format!(
                "upper bounds leave {residual} of the mass unassigned"
            )));
        }
        let objective = dot(mu, &p);
        Ok(LpSolution {
            p,
            objective,
            solver: SolverTag::PartitionGreedy,
        })
    }

    fn tag(&self) -> SolverTag {
        SolverTag::PartitionGreedy
    }

    fn k(&self) -> usize {
        self.k
    }
}

/// One-shot partition greedy solve.
pub fn solve_partition_greedy(mu: &[f64], polytope: &FairPolytope) -> Result<LpSolution> {
    PartitionGreedy::new(polytope)?.solve(mu)
}
