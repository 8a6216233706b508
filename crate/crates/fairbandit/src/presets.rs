//! The three standard sweeps.
//!
//! * `lower-bound`: `lower_i = ell` for `ell` in 0, 0.1, ..., 0.5 with
//!   `upper_i = 1`, on the configured environment (synthetic by default).
//! * `alpha`: the synthetic model with `alpha` in 0, 0.05, ..., 0.25 and
//!   `lower_i = 0.25`, unless the configuration sets other uniform bounds.
//! * `risk-difference`: `lower_i = 0` and `upper_i = u` for `u = j/g`,
//!   `j = g, ..., 1`, on a ratings-derived environment (a generated log when
//!   the configuration names the synthetic model).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use fairbandit_core::constraints::{validate, FairPolytope, FairnessBounds};
use fairbandit_core::env::{synthetic_two_group, ArmModel};

use crate::config::{EnvironmentConfig, ExperimentConfig, PolytopeConfig};
use crate::sweep::{GridPoint, SweepPlan};
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    LowerBound,
    Alpha,
    RiskDifference,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::LowerBound => "lower-bound",
            Preset::Alpha => "alpha",
            Preset::RiskDifference => "risk-difference",
        }
    }

    /// The grid used when none is given.
    pub fn default_grid(self, groups: usize) -> Vec<f64> {
        match self {
            Preset::LowerBound => (0..=5).map(|i| i as f64 / 10.0).collect(),
            Preset::Alpha => (0..=5).map(|i| i as f64 * 0.05).collect(),
            Preset::RiskDifference => (1..=groups).rev().map(|j| j as f64 / groups as f64).collect(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_end_matches("-sweep") {
            "lower-bound" => Ok(Preset::LowerBound),
            "alpha" => Ok(Preset::Alpha),
            "risk-difference" => Ok(Preset::RiskDifference),
            _ => Err(HarnessError::Config(format!(
                "unknown preset {s:?}; expected lower-bound, alpha or risk-difference"
            ))),
        }
    }
}

fn uniform_point(model: Arc<ArmModel>, ell: f64, u: f64, alpha: Option<f64>) -> GridPoint {
    let g = model.groups().group_count();
    let polytope = FairnessBounds::uniform(g, ell, u)
        .and_then(|b| FairPolytope::new(model.groups().clone(), b))
        .and_then(|p| validate(&p).into_result().map(|_| p))
        .map_err(|e| e.to_string());
    GridPoint {
        ell: Some(ell),
        u: Some(u),
        alpha,
        model,
        polytope,
    }
}

/// Builds the plan for `preset`; `grid` replaces the default grid values.
pub fn preset_plan(preset: Preset, config: &ExperimentConfig, grid: Option<Vec<f64>>) -> Result<SweepPlan> {
    config.check()?;
    let points = match preset {
        Preset::LowerBound => {
            let model = config.model()?;
            let alpha = match config.environment {
                EnvironmentConfig::Synthetic { alpha, .. } => Some(alpha),
                _ => None,
            };
            let u = config.polytope.uniform_bounds().map_or(1.0, |(_, u)| u);
            let grid = grid.unwrap_or_else(|| preset.default_grid(model.groups().group_count()));
            grid.iter()
                .map(|&ell| uniform_point(model.clone(), ell, u, alpha))
                .collect::<Vec<_>>()
        }
        Preset::Alpha => {
            let EnvironmentConfig::Synthetic { base_means, .. } = config.environment else {
                return Err(HarnessError::Config("the alpha sweep needs the synthetic environment".into()));
            };
            let (ell, u) = match config.polytope {
                PolytopeConfig::Uniform { lower, upper } if (lower, upper) != (0.0, 1.0) => (lower, upper),
                _ => (0.25, 1.0),
            };
            let grid = grid.unwrap_or_else(|| preset.default_grid(2));
            let mut points = Vec::with_capacity(grid.len());
            for alpha in grid {
                match synthetic_two_group(alpha, base_means) {
                    Ok(m) => points.push(uniform_point(Arc::new(m), ell, u, Some(alpha))),
                    Err(e) => {
                        // keep a placeholder model so the error row has a home
                        let m = synthetic_two_group(0.0, base_means)?;
                        points.push(GridPoint {
                            polytope: Err(e.to_string()),
                            ..uniform_point(Arc::new(m), ell, u, Some(alpha))
                        });
                    }
                }
            }
            points
        }
        Preset::RiskDifference => {
            let env = match &config.environment {
                EnvironmentConfig::Synthetic { .. } => EnvironmentConfig::GeneratedRatings {
                    users: fairbandit_core::env::SyntheticRatings::default().users,
                    views_per_user: fairbandit_core::env::SyntheticRatings::default().views_per_user,
                    seed: config.seed,
                    min_views: fairbandit_core::env::DEFAULT_MIN_VIEWS,
                },
                other => other.clone(),
            };
            let model = Arc::new(env.build()?);
            let grid = grid.unwrap_or_else(|| preset.default_grid(model.groups().group_count()));
            grid.iter()
                .map(|&u| uniform_point(model.clone(), 0.0, u, None))
                .collect()
        }
    };
    Ok(SweepPlan {
        preset: preset.name().to_string(),
        points,
        algorithms: config.algorithms()?,
        horizon: config.horizon,
        repetitions: config.repetitions,
        seed: config.seed,
        contexts: config.contexts.clone(),
        params: config.policy.params()?,
        keep_traces: config.output.trace.is_some(),
        wall_clock: config.output.wall_clock,
        workers: None,
    })
}
