//! Experiment configuration, read from TOML and patched by command-line flags.
//!
//! ```toml
//! algorithms = ["fair-oful", "fair-eps", "opt"]
//! horizon = 1000
//! repetitions = 100
//! seed = 7
//!
//! [environment]
//! kind = "synthetic"
//! alpha = 0.1
//!
//! [polytope]
//! mode = "uniform"
//! lower = 0.25
//! upper = 1.0
//!
//! [policy]
//! delta = 0.1
//! schedule = "experimental"
//! c = 10.0
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fairbandit_core::bandit::OfulConfig;
use fairbandit_core::constraints::{
    bounds_from_risk_difference, FairPolytope, FairnessBounds, GroupStructure,
};
use fairbandit_core::env::{
    build_dataset_model, generate_ratings_table, synthetic_two_group, ArmModel, DatasetModel,
    SyntheticRatings, DEFAULT_ARMS_PER_GROUP, DEFAULT_GROUP_NAMES, DEFAULT_MIN_VIEWS, SYNTHETIC_BASE_MEANS,
};
use fairbandit_core::seed::mix64;
use fairbandit_core::sim::{Algorithm, PolicyParams, ScheduleMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset_io::read_ratings_table;
use crate::polytope_file::load_polytope;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<String>,
    pub horizon: u64,
    pub repetitions: u64,
    pub seed: u64,
    /// Context indices to run; all when absent.
    pub contexts: Option<Vec<usize>>,
    pub environment: EnvironmentConfig,
    pub polytope: PolytopeConfig,
    pub policy: PolicyConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.iter().map(|a| a.name().to_string()).collect(),
            horizon: 1000,
            repetitions: 100,
            seed: 0,
            contexts: None,
            environment: EnvironmentConfig::default(),
            polytope: PolytopeConfig::default(),
            policy: PolicyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentConfig {
    /// Two groups of four Bernoulli arms, two contexts.
    Synthetic {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_base_means")]
        base_means: [f64; 4],
    },
    /// Arms built from a ratings log on disk.
    Ratings {
        ratings: PathBuf,
        ontology: PathBuf,
        #[serde(default = "default_group_names")]
        group_names: Vec<String>,
        #[serde(default = "default_arms_per_group")]
        arms_per_group: Vec<usize>,
        #[serde(default = "default_min_views")]
        min_views: usize,
    },
    /// Arms built from a generated ratings log with the default group layout.
    GeneratedRatings {
        #[serde(default = "default_users")]
        users: usize,
        #[serde(default = "default_views")]
        views_per_user: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_min_views")]
        min_views: usize,
    },
}

fn default_alpha() -> f64 {
    0.1
}
fn default_base_means() -> [f64; 4] {
    SYNTHETIC_BASE_MEANS
}
fn default_group_names() -> Vec<String> {
    DEFAULT_GROUP_NAMES.iter().map(|s| s.to_string()).collect()
}
fn default_arms_per_group() -> Vec<usize> {
    DEFAULT_ARMS_PER_GROUP.to_vec()
}
fn default_min_views() -> usize {
    DEFAULT_MIN_VIEWS
}
fn default_users() -> usize {
    SyntheticRatings::default().users
}
fn default_views() -> usize {
    SyntheticRatings::default().views_per_user
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        EnvironmentConfig::Synthetic {
            alpha: default_alpha(),
            base_means: default_base_means(),
        }
    }
}

impl EnvironmentConfig {
    pub fn build(&self) -> Result<ArmModel> {
        Ok(match self {
            EnvironmentConfig::Synthetic { alpha, base_means } => synthetic_two_group(*alpha, *base_means)?,
            _ => self.build_dataset()?.model,
        })
    }

    /// Like [`build`](Self::build) but keeps the ingestion report. Errors on
    /// the synthetic model.
    pub fn build_dataset(&self) -> Result<DatasetModel> {
        match self {
            EnvironmentConfig::Synthetic { .. } => {
                Err(HarnessError::Config("the synthetic model has no ratings log".into()))
            }
            EnvironmentConfig::Ratings {
                ratings,
                ontology,
                group_names,
                arms_per_group,
                min_views,
            } => {
                let table = read_ratings_table(ratings, ontology)?;
                Ok(build_dataset_model(&table, group_names, arms_per_group, *min_views)?)
            }
            EnvironmentConfig::GeneratedRatings {
                users,
                views_per_user,
                seed,
                min_views,
            } => {
                let spec = SyntheticRatings {
                    users: *users,
                    views_per_user: *views_per_user,
                    ..SyntheticRatings::default()
                };
                let mut rng = ChaCha8Rng::seed_from_u64(mix64(*seed));
                let table = generate_ratings_table(&spec, &mut rng)?;
                Ok(build_dataset_model(&table, &spec.group_names, &DEFAULT_ARMS_PER_GROUP, *min_views)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolytopeConfig {
    /// The same `[lower, upper]` for every group of the environment.
    Uniform {
        #[serde(default)]
        lower: f64,
        #[serde(default = "one")]
        upper: f64,
    },
    /// Per-group bounds over the environment's groups.
    Explicit { lower: Vec<f64>, upper: Vec<f64> },
    /// Bounds derived from a risk-difference target.
    RiskDifference { beta: f64 },
    /// A polytope file; its arm count must match the environment.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl Default for PolytopeConfig {
    fn default() -> Self {
        PolytopeConfig::Uniform { lower: 0.0, upper: 1.0 }
    }
}

impl PolytopeConfig {
    pub fn build(&self, groups: &GroupStructure) -> Result<FairPolytope> {
        let g = groups.group_count();
        let bounds = match self {
            PolytopeConfig::Uniform { lower, upper } => FairnessBounds::uniform(g, *lower, *upper)?,
            PolytopeConfig::Explicit { lower, upper } => FairnessBounds::new(lower.clone(), upper.clone())?,
            PolytopeConfig::RiskDifference { beta } => bounds_from_risk_difference(*beta, g, None)?,
            PolytopeConfig::File { path } => {
                let p = load_polytope(path)?;
                if p.k() != groups.k() {
                    return Err(HarnessError::Config(format!(
                        "{}: polytope has {} arms, the environment {}",
                        path.display(),
                        p.k(),
                        groups.k()
                    )));
                }
                return Ok(p);
            }
        };
        Ok(FairPolytope::new(groups.clone(), bounds)?)
    }

    /// `(lower, upper)` when every group shares them.
    pub fn uniform_bounds(&self) -> Option<(f64, f64)> {
        match self {
            PolytopeConfig::Uniform { lower, upper } => Some((*lower, *upper)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleName {
    Experimental,
    Theoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub delta: f64,
    /// Defaults to `sqrt(k)`.
    pub sigma: Option<f64>,
    pub refresh_every: u64,
    pub schedule: ScheduleName,
    pub c: f64,
    pub gamma_lower_bound: Option<f64>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let p = PolicyParams::default();
        Self {
            delta: p.delta,
            sigma: None,
            refresh_every: p.refresh_every,
            schedule: ScheduleName::Experimental,
            c: 10.0,
            gamma_lower_bound: None,
        }
    }
}

impl PolicyConfig {
    pub fn params(&self) -> Result<PolicyParams> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(HarnessError::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let Some(s) = self.sigma {
            if !(s >= 1.0) {
                return Err(HarnessError::Config(format!("sigma must be at least 1, got {s}")));
            }
        }
        let schedule = match self.schedule {
            ScheduleName::Experimental => ScheduleMode::Experimental { c: self.c },
            ScheduleName::Theoretical => ScheduleMode::Theoretical {
                gamma_lower_bound: self.gamma_lower_bound,
            },
        };
        Ok(PolicyParams {
            delta: self.delta,
            sigma: self.sigma,
            refresh_every: self.refresh_every.max(1),
            schedule,
            anchor: None,
        })
    }

    pub fn oful_config(&self, k: usize) -> Result<OfulConfig> {
        Ok(self.params()?.oful_config(k))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// Fill the `seconds` column with measured wall-clock time. Off by
    /// default so repeated runs produce identical files.
    pub wall_clock: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| HarnessError::Toml {
            path: origin.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn algorithms(&self) -> Result<Vec<Algorithm>> {
        if self.algorithms.is_empty() {
            return Err(HarnessError::Config("no algorithms selected".into()));
        }
        self.algorithms
            .iter()
            .map(|a| a.parse().map_err(HarnessError::from))
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(HarnessError::Config("horizon must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Config("repetitions must be at least 1".into()));
        }
        self.algorithms()?;
        self.policy.params()?;
        Ok(())
    }

    /// The environment, shared across cells.
    pub fn model(&self) -> Result<Arc<ArmModel>> {
        Ok(Arc::new(self.environment.build()?))
    }

    pub fn contexts_for(&self, model: &ArmModel) -> Result<Vec<usize>> {
        match &self.contexts {
            None => Ok((0..model.context_count()).collect()),
            Some(list) => {
                if let Some(c) = list.iter().find(|&&c| c >= model.context_count()) {
                    return Err(HarnessError::Config(format!(
                        "context {c} outside [0, {})",
                        model.context_count()
                    )));
                }
                Ok(list.clone())
            }
        }
    }
}
