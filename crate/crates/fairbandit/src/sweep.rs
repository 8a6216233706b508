//! Grids of runs: every (grid point, algorithm, repetition, context) cell
//! runs independently with its own derived seed, then cells are reduced in
//! key order into one [`SummaryRow`] per grid point and algorithm.

use std::sync::Arc;
use std::time::Instant;

use fairbandit_core::constraints::{risk_difference_bound, FairPolytope};
use fairbandit_core::env::ArmModel;
use fairbandit_core::metrics::{audit_trace, fair_regret, mean_sem, normalized_cumulative_reward};
use fairbandit_core::seed::derive_seed;
use fairbandit_core::sim::{run_id, run_single, Algorithm, PolicyParams, RunSpec, TraceRecord};
use fairbandit_core::TOL;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::traces::{SummaryRow, TraceWriter};
use crate::{HarnessError, Result};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FAIRBANDIT_WORKERS";

#[derive(Debug, Clone)]
pub struct GridPoint {
    pub ell: Option<f64>,
    pub u: Option<f64>,
    pub alpha: Option<f64>,
    pub model: Arc<ArmModel>,
    /// An infeasible point is kept so it can be reported.
    pub polytope: std::result::Result<FairPolytope, String>,
}

#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub preset: String,
    pub points: Vec<GridPoint>,
    pub algorithms: Vec<Algorithm>,
    pub horizon: u64,
    pub repetitions: u64,
    pub seed: u64,
    /// All contexts of each point's model when `None`.
    pub contexts: Option<Vec<usize>>,
    pub params: PolicyParams,
    pub keep_traces: bool,
    pub wall_clock: bool,
    /// Rayon's default when `None`.
    pub workers: Option<usize>,
}

/// Result of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub grid: usize,
    pub algorithm: Algorithm,
    pub rep: u64,
    pub context: usize,
    pub ncr: f64,
    pub pseudo_regret: f64,
    pub realized_regret: f64,
    /// Smallest and largest mass of each group over the run.
    pub mass_lo: Vec<f64>,
    pub mass_hi: Vec<f64>,
    /// Rounds and groups outside the bounds at tolerance `TOL`.
    pub violations: usize,
    pub steps: u64,
    pub lp_calls: u64,
    pub seconds: f64,
    pub records: Option<Vec<TraceRecord>>,
}

impl CellOutcome {
    pub fn run_id(&self) -> String {
        run_id(self.algorithm, self.grid, self.rep, self.context)
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SummaryRow>,
    /// Successful cells in key order.
    pub cells: Vec<CellOutcome>,
}

impl SweepOutput {
    /// Traces of every kept cell, in key order.
    pub fn write_traces<W: std::io::Write>(&self, out: W) -> Result<W> {
        let groups = self
            .cells
            .iter()
            .find_map(|c| c.records.as_ref().and_then(|r| r.first()).map(|r| r.masses.len()))
            .unwrap_or(0);
        let mut w = TraceWriter::new(out, groups)?;
        for c in &self.cells {
            if let Some(records) = &c.records {
                w.write_run(&c.run_id(), records)?;
            }
        }
        w.finish()
    }

    pub fn row(&self, grid_ell: Option<f64>, algo: Algorithm) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.ell == grid_ell && r.algo == algo.name())
    }
}

struct Cell {
    grid: usize,
    algorithm: Algorithm,
    rep: u64,
    context: usize,
}

pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn run_cell(plan: &SweepPlan, cell: &Cell) -> std::result::Result<CellOutcome, String> {
    let point = &plan.points[cell.grid];
    let polytope = point.polytope.as_ref().map_err(Clone::clone)?;
    let start = Instant::now();
    let spec = RunSpec {
        algorithm: cell.algorithm,
        model: &point.model,
        polytope,
        context: cell.context,
        horizon: plan.horizon,
        params: &plan.params,
    };
    let seed = derive_seed(plan.seed, cell.rep, cell.context as u64, cell.grid as u64);
    let outcome = (|| -> fairbandit_core::Result<CellOutcome> {
        let trace = run_single(&spec, &mut ChaCha8Rng::seed_from_u64(seed))?;
        let mu = point.model.means(cell.context)?;
        let regret = fair_regret(&trace.records, mu, polytope)?;
        let g = polytope.lower().len();
        let mut lo = vec![f64::INFINITY; g];
        let mut hi = vec![f64::NEG_INFINITY; g];
        for r in &trace.records {
            for (i, &m) in r.masses.iter().enumerate() {
                lo[i] = lo[i].min(m);
                hi[i] = hi[i].max(m);
            }
        }
        Ok(CellOutcome {
            grid: cell.grid,
            algorithm: cell.algorithm,
            rep: cell.rep,
            context: cell.context,
            ncr: normalized_cumulative_reward(&trace.records)?,
            pseudo_regret: regret.pseudo,
            realized_regret: regret.realized,
            mass_lo: lo,
            mass_hi: hi,
            violations: audit_trace(&trace.records, polytope, TOL)?.len(),
            steps: trace.records.len() as u64,
            lp_calls: trace.lp_calls,
            seconds: 0.0,
            records: plan.keep_traces.then_some(trace.records),
        })
    })();
    outcome
        .map(|mut c| {
            c.seconds = start.elapsed().as_secs_f64();
            c
        })
        .map_err(|e| e.to_string())
}

pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutput> {
    if plan.points.is_empty() {
        return Err(HarnessError::Config("empty grid".into()));
    }
    if plan.algorithms.is_empty() {
        return Err(HarnessError::Config("no algorithms selected".into()));
    }
    if plan.horizon == 0 || plan.repetitions == 0 {
        return Err(HarnessError::Config("horizon and repetitions must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for (grid, point) in plan.points.iter().enumerate() {
        let contexts: Vec<usize> = match &plan.contexts {
            Some(c) => c.clone(),
            None => (0..point.model.context_count()).collect(),
        };
        if let Some(c) = contexts.iter().find(|&&c| c >= point.model.context_count()) {
            return Err(HarnessError::Config(format!("context {c} outside the model")));
        }
        for &algorithm in &plan.algorithms {
            for rep in 0..plan.repetitions {
                for &context in &contexts {
                    cells.push(Cell {
                        grid,
                        algorithm,
                        rep,
                        context,
                    });
                }
            }
        }
    }

    let run_all = || -> Vec<_> { cells.par_iter().map(|c| run_cell(plan, c)).collect() };
    let results = match plan.workers.or_else(workers_from_env) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut rows = Vec::new();
    let mut kept = Vec::new();
    let mut iter = cells.iter().zip(results).peekable();
    for (grid, point) in plan.points.iter().enumerate() {
        for &algorithm in &plan.algorithms {
            let mut group: Vec<CellOutcome> = Vec::new();
            let mut error = None;
            while let Some((cell, _)) = iter.peek() {
                if cell.grid != grid || cell.algorithm != algorithm {
                    break;
                }
                let (_, result) = iter.next().expect("peeked");
                match result {
                    Ok(c) => group.push(c),
                    Err(e) => {
                        error.get_or_insert(e);
                    }
                }
            }
            rows.push(summarize(plan, point, algorithm, &group, error)?);
            if rows.last().is_some_and(|r| r.error.is_empty()) {
                kept.extend(group);
            }
        }
    }
    Ok(SweepOutput { rows, cells: kept })
}

fn summarize(
    plan: &SweepPlan,
    point: &GridPoint,
    algorithm: Algorithm,
    cells: &[CellOutcome],
    error: Option<String>,
) -> Result<SummaryRow> {
    let mut row = SummaryRow {
        preset: plan.preset.clone(),
        algo: algorithm.name().to_string(),
        ell: point.ell,
        u: point.u,
        alpha: point.alpha,
        mean_ncr: None,
        sem_ncr: None,
        mean_regret: None,
        rd_bound: point.polytope.as_ref().ok().and_then(risk_difference_bound),
        empirical_rd: None,
        seconds: 0.0,
        error: String::new(),
    };
    if let Some(e) = error {
        row.error = e;
        return Ok(row);
    }
    let ncr: Vec<f64> = cells.iter().map(|c| c.ncr).collect();
    let regret: Vec<f64> = cells.iter().map(|c| c.pseudo_regret).collect();
    let (mean, sem) = mean_sem(&ncr)?;
    row.mean_ncr = Some(mean);
    row.sem_ncr = Some(sem);
    row.mean_regret = Some(mean_sem(&regret)?.0);
    row.empirical_rd = Some(empirical_rd(cells));
    if plan.wall_clock {
        row.seconds = cells.iter().map(|c| c.seconds).sum();
    }
    Ok(row)
}

/// Largest per-group spread of mass across all rounds of `cells`.
pub fn empirical_rd(cells: &[CellOutcome]) -> f64 {
    let Some(first) = cells.first() else { return 0.0 };
    let mut lo = first.mass_lo.clone();
    let mut hi = first.mass_hi.clone();
    for c in &cells[1..] {
        for i in 0..lo.len() {
            lo[i] = lo[i].min(c.mass_lo[i]);
            hi[i] = hi[i].max(c.mass_hi[i]);
        }
    }
    lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
}
