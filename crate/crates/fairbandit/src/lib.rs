//! Experiment harness for fairness-constrained bandits: configuration files,
//! seeded parallel sweeps, CSV traces and summaries, timing and fairness
//! audits. The algorithms themselves live in `fairbandit-core`.

pub mod audit;
pub mod config;
pub mod dataset_io;
mod error;
pub mod polytope_file;
pub mod presets;
pub mod sweep;
pub mod timing;
pub mod traces;

use std::sync::Arc;

pub use error::{HarnessError, Result};

use config::{EnvironmentConfig, ExperimentConfig};
use fairbandit_core::constraints::validate;
use sweep::{GridPoint, SweepPlan};

/// A single-point plan for `config` (the `run` command).
pub fn single_plan(config: &ExperimentConfig) -> Result<SweepPlan> {
    config.check()?;
    let model = config.model()?;
    let polytope = config.polytope.build(model.groups())?;
    validate(&polytope).into_result()?;
    let (ell, u) = match config.polytope.uniform_bounds() {
        Some((l, u)) => (Some(l), Some(u)),
        None => (None, None),
    };
    let alpha = match config.environment {
        EnvironmentConfig::Synthetic { alpha, .. } => Some(alpha),
        _ => None,
    };
    Ok(SweepPlan {
        preset: "run".into(),
        points: vec![GridPoint {
            ell,
            u,
            alpha,
            model: Arc::clone(&model),
            polytope: Ok(polytope),
        }],
        algorithms: config.algorithms()?,
        horizon: config.horizon,
        repetitions: config.repetitions,
        seed: config.seed,
        contexts: Some(config.contexts_for(&model)?),
        params: config.policy.params()?,
        keep_traces: config.output.trace.is_some(),
        wall_clock: config.output.wall_clock,
        workers: None,
    })
}
