//! Statistics over traces.

use alloc::vec::Vec;

use crate::constraints::{risk_difference_of_masses, FairPolytope};
use crate::lp::oracle_for;
use crate::sim::TraceRecord;
use crate::{Error, Result};

/// `sum_t r_t / T`.
pub fn normalized_cumulative_reward(trace: &[TraceRecord]) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Domain("empty trace".into()));
    }
    Ok(trace.iter().map(|r| r.reward).sum::<f64>() / trace.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairRegret {
    /// `T mu*^T p_opt - sum_t r_t`.
    pub realized: f64,
    /// `sum_t mu*^T (p_opt - p^t)`.
    pub pseudo: f64,
}

/// Fair regret against the best fair distribution for `mu_star`. The
/// pseudo-regret uses the per-round regret stored in the trace.
pub fn fair_regret(trace: &[TraceRecord], mu_star: &[f64], polytope: &FairPolytope) -> Result<FairRegret> {
    let opt = oracle_for(polytope)?.solve(mu_star)?.objective;
    let rewards: f64 = trace.iter().map(|r| r.reward).sum();
    Ok(FairRegret {
        realized: trace.len() as f64 * opt - rewards,
        pseudo: trace.iter().map(|r| r.regret).sum(),
    })
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`); the
/// error is 0 for a single value.
pub fn mean_sem(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Domain("no values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, libm::sqrt(var / n as f64)))
}

/// Largest spread (max minus min) of any one group's mass over all recorded
/// rounds, across contexts.
pub fn trace_risk_difference<'a, I>(traces: I) -> f64
where
    I: IntoIterator<Item = &'a [TraceRecord]>,
{
    risk_difference_of_masses(
        traces
            .into_iter()
            .flat_map(|t| t.iter().map(|r| r.masses.as_slice())),
    )
}

/// A group bound broken in one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditViolation {
    pub t: u64,
    pub context: usize,
    pub group: usize,
    pub mass: f64,
}

/// Every round and group whose mass leaves `[lower - tol, upper + tol]`.
pub fn audit_trace(trace: &[TraceRecord], polytope: &FairPolytope, tol: f64) -> Result<Vec<AuditViolation>> {
    let g = polytope.lower().len();
    let mut out = Vec::new();
    for r in trace {
        if r.masses.len() != g {
            return Err(Error::LengthMismatch {
                expected: g,
                found: r.masses.len(),
            });
        }
        for (i, &m) in r.masses.iter().enumerate() {
            if m < polytope.lower()[i] - tol || m > polytope.upper()[i] + tol {
                out.push(AuditViolation {
                    t: r.t,
                    context: r.context,
                    group: i,
                    mass: m,
                });
            }
        }
    }
    Ok(out)
}
