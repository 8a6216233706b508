//! Linear optimization over the fair polytope: `argmax_{p in C} mu^T p`.
//!
//! Partition and laminar structures are solved exactly by greedy
//! allocation. Small instances of any structure can be solved by
//! enumerating basic feasible solutions, which also yields the vertex gap.

mod brute;
mod fair_point;
mod laminar;
mod partition;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

pub use brute::{compute_gamma, enumerate_vertices, solve_oracle_bruteforce, BruteForce, GammaReport, BRUTE_FORCE_MAX_K};
pub use fair_point::{default_fair_point, interior_radius, FairPoint};
pub use laminar::{solve_laminar_greedy, LaminarGreedy};
pub use partition::{solve_partition_greedy, PartitionGreedy};

use crate::constraints::{FairPolytope, StructureClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTag {
    PartitionGreedy,
    LaminarGreedy,
    BruteForce,
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverTag::PartitionGreedy => "partition-greedy",
            SolverTag::LaminarGreedy => "laminar-greedy",
            SolverTag::BruteForce => "brute-force",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub p: Vec<f64>,
    pub objective: f64,
    pub solver: SolverTag,
}

/// An exact solver for `max_{p in C} mu^T p` over one fixed polytope.
pub trait LpOracle: Send + Sync {
    fn solve(&self, mu: &[f64]) -> Result<LpSolution>;

    fn tag(&self) -> SolverTag;

    fn k(&self) -> usize;
}

/// The fastest exact oracle for the polytope's structure class.
pub fn oracle_for(polytope: &FairPolytope) -> Result<Box<dyn LpOracle>> {
    Ok(match polytope.structure().class() {
        StructureClass::Partition => Box::new(PartitionGreedy::new(polytope)?),
        StructureClass::Laminar => Box::new(LaminarGreedy::new(polytope)?),
        StructureClass::General => Box::new(BruteForce::new(polytope)?),
    })
}

pub(crate) fn check_mu(mu: &[f64], k: usize) -> Result<()> {
    if mu.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            found: mu.len(),
        });
    }
    if mu.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("reward vector has a non-finite entry".into()));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Arm indices sorted by reward, best first; ties go to the lower index.
pub(crate) fn rank_arms(mu: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..mu.len()).collect();
    order.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]).then(a.cmp(&b)));
    order
}
