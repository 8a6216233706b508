//! Post-hoc fairness check of a trace file.

use std::collections::BTreeSet;

use fairbandit_core::constraints::FairPolytope;
use fairbandit_core::metrics::audit_trace;

use crate::traces::TraceRow;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditFinding {
    pub run_id: String,
    pub t: u64,
    pub context: usize,
    pub group: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub rows: usize,
    pub runs: usize,
    pub findings: Vec<AuditFinding>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn audit_rows(rows: &[TraceRow], polytope: &FairPolytope, tol: f64) -> Result<AuditReport> {
    let mut findings = Vec::new();
    let mut runs = BTreeSet::new();
    for row in rows {
        runs.insert(row.run_id.as_str());
        for v in audit_trace(std::slice::from_ref(&row.record), polytope, tol)? {
            findings.push(AuditFinding {
                run_id: row.run_id.clone(),
                t: v.t,
                context: v.context,
                group: v.group,
                mass: v.mass,
            });
        }
    }
    Ok(AuditReport {
        rows: rows.len(),
        runs: runs.len(),
        findings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairbandit_core::constraints::{FairnessBounds, GroupStructure};
    use fairbandit_core::sim::TraceRecord;

    fn row(id: &str, masses: Vec<f64>) -> TraceRow {
        TraceRow {
            run_id: id.into(),
            record: TraceRecord {
                t: 1,
                context: 0,
                epsilon: None,
                masses,
                arm: 0,
                reward: 0.0,
                cum_reward: 0.0,
                regret: 0.0,
            },
        }
    }

    #[test]
    fn finds_violations() {
        let p = FairPolytope::new(
            GroupStructure::partition_from_sizes(&[2, 2]).unwrap(),
            FairnessBounds::uniform(2, 0.25, 1.0).unwrap(),
        )
        .unwrap();
        let rows = vec![row("a", vec![0.5, 0.5]), row("b", vec![1.0, 0.0]), row("b", vec![0.25 - 1e-12, 0.75])];
        let r = audit_rows(&rows, &p, 1e-9).unwrap();
        assert_eq!(r.rows, 3);
        assert_eq!(r.runs, 2);
        assert_eq!(r.findings.len(), 1);
        assert_eq!(r.findings[0].group, 1);
        assert!(!r.passed());
    }
}
