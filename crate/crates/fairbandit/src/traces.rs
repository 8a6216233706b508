//! CSV schemas.
//!
//! Traces: `run_id,t,context,arm,reward,cum_reward,regret,mass_1..mass_g,epsilon`
//! (`epsilon` empty for policies without one). Summaries: the fields of
//! [`SummaryRow`] in order. Floats are written in shortest round-trip form.

use std::io::{Read, Write};
use std::path::Path;

use fairbandit_core::sim::TraceRecord;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

pub const TRACE_FIXED_COLUMNS: [&str; 7] = ["run_id", "t", "context", "arm", "reward", "cum_reward", "regret"];

pub fn trace_header(groups: usize) -> Vec<String> {
    let mut h: Vec<String> = TRACE_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend((1..=groups).map(|i| format!("mass_{i}")));
    h.push("epsilon".into());
    h
}

pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
    groups: usize,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, groups: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner
            .write_record(trace_header(groups))
            .map_err(|e| HarnessError::csv("<trace>", e))?;
        Ok(Self { inner, groups })
    }

    pub fn write_run(&mut self, run_id: &str, records: &[TraceRecord]) -> Result<()> {
        let mut row = Vec::with_capacity(8 + self.groups);
        for r in records {
            if r.masses.len() != self.groups {
                return Err(HarnessError::Config(format!(
                    "run {run_id}: {} group masses, header has {}",
                    r.masses.len(),
                    self.groups
                )));
            }
            row.clear();
            row.push(run_id.to_string());
            row.push(r.t.to_string());
            row.push(r.context.to_string());
            row.push(r.arm.to_string());
            row.push(r.reward.to_string());
            row.push(r.cum_reward.to_string());
            row.push(r.regret.to_string());
            row.extend(r.masses.iter().map(f64::to_string));
            row.push(r.epsilon.map(|e| e.to_string()).unwrap_or_default());
            self.inner.write_record(&row).map_err(|e| HarnessError::csv("<trace>", e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| HarnessError::io("<trace>", e))?;
        self.inner
            .into_inner()
            .map_err(|e| HarnessError::io("<trace>", e.into_error()))
    }
}

/// One parsed trace line.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub run_id: String,
    pub record: TraceRecord,
}

pub fn read_traces<R: Read>(input: R, origin: &Path) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| HarnessError::csv(origin, e))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let fixed: Vec<usize> = TRACE_FIXED_COLUMNS
        .iter()
        .map(|c| col(c).ok_or_else(|| HarnessError::Config(format!("{}: missing column {c}", origin.display()))))
        .collect::<Result<_>>()?;
    let mut mass_cols = Vec::new();
    while let Some(i) = col(&format!("mass_{}", mass_cols.len() + 1)) {
        mass_cols.push(i);
    }
    let eps_col = col("epsilon");
    let bad = |line: usize, what: &str| HarnessError::Config(format!("{}:{line}: bad {what}", origin.display()));
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(origin, e))?;
        let line = n + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| bad(line, what));
        let int = |i: usize, what: &str| field(i).parse::<u64>().map_err(|_| bad(line, what));
        let masses = mass_cols
            .iter()
            .map(|&i| num(i, "mass"))
            .collect::<Result<Vec<f64>>>()?;
        let epsilon = match eps_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(s.parse::<f64>().map_err(|_| bad(line, "epsilon"))?),
        };
        out.push(TraceRow {
            run_id: field(fixed[0]).to_string(),
            record: TraceRecord {
                t: int(fixed[1], "t")?,
                context: int(fixed[2], "context")? as usize,
                arm: int(fixed[3], "arm")? as usize,
                reward: num(fixed[4], "reward")?,
                cum_reward: num(fixed[5], "cum_reward")?,
                regret: num(fixed[6], "regret")?,
                masses,
                epsilon,
            },
        });
    }
    Ok(out)
}

/// One aggregated line per grid point and algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub preset: String,
    pub algo: String,
    pub ell: Option<f64>,
    pub u: Option<f64>,
    pub alpha: Option<f64>,
    pub mean_ncr: Option<f64>,
    pub sem_ncr: Option<f64>,
    pub mean_regret: Option<f64>,
    pub rd_bound: Option<f64>,
    pub empirical_rd: Option<f64>,
    pub seconds: f64,
    pub error: String,
}

pub fn write_summaries<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| HarnessError::csv("<summary>", e))?;
    }
    w.flush().map_err(|e| HarnessError::io("<summary>", e))
}

pub fn read_summaries<R: Read>(input: R, origin: &Path) -> Result<Vec<SummaryRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| HarnessError::csv(origin, e)))
        .collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}
