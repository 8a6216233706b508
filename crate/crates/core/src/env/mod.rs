//! Reward models.

mod dataset;
mod synthetic;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::constraints::GroupStructure;
use crate::{Error, Result};

pub use dataset::{
    build_dataset_model, generate_ratings_table, DatasetModel, ExcludedUser, RatingRow, RatingsTable,
    SyntheticRatings, DEFAULT_ARMS_PER_GROUP, DEFAULT_GROUP_NAMES, DEFAULT_MIN_VIEWS,
};
pub use synthetic::{synthetic_two_group, SYNTHETIC_BASE_MEANS};

/// Reward noise family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// `r ~ Bernoulli(mu)`.
    Bernoulli,
    /// `mu + N(0, sd^2)`, redrawn until it lands in `(0, 1)`.
    TruncatedNormal { sd: f64 },
}

/// Per-context mean rewards over a fixed set of arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    contexts: Vec<String>,
    means: Vec<Vec<f64>>,
    noise: Noise,
    groups: GroupStructure,
}

impl ArmModel {
    pub fn new(contexts: Vec<String>, means: Vec<Vec<f64>>, noise: Noise, groups: GroupStructure) -> Result<Self> {
        if contexts.is_empty() || contexts.len() != means.len() {
            return Err(Error::LengthMismatch {
                expected: contexts.len(),
                found: means.len(),
            });
        }
        let k = groups.k();
        for (c, mu) in contexts.iter().zip(&means) {
            if mu.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    found: mu.len(),
                });
            }
            if let Some(m) = mu.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                return Err(Error::Domain(format!("context {c}: mean {m} outside [0, 1]")));
            }
        }
        if let Noise::TruncatedNormal { sd } = noise {
            if !(sd > 0.0) {
                return Err(Error::Domain(format!("noise sd must be positive, got {sd}")));
            }
            // rejection needs some mass inside (0, 1)
            if means.iter().flatten().any(|&m| m <= 0.0 || m >= 1.0) {
                return Err(Error::Domain("truncated-normal means must lie in (0, 1)".into()));
            }
        }
        Ok(Self {
            contexts,
            means,
            noise,
            groups,
        })
    }

    pub fn k(&self) -> usize {
        self.groups.k()
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn context_count(&self) -> usize {
        self.contexts.len()
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }

    /// `mu*(s)`.
    pub fn means(&self, context: usize) -> Result<&[f64]> {
        self.means
            .get(context)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Domain(format!("context {context} outside [0, {})", self.contexts.len())))
    }

    pub fn draw_reward<R: Rng + ?Sized>(&self, context: usize, arm: usize, rng: &mut R) -> Result<f64> {
        let mu = *self
            .means(context)?
            .get(arm)
            .ok_or_else(|| Error::Domain(format!("arm {arm} outside [0, {})", self.k())))?;
        Ok(draw(self.noise, mu, rng))
    }
}

/// One reward draw with mean parameter `mu`.
pub fn draw<R: Rng + ?Sized>(noise: Noise, mu: f64, rng: &mut R) -> f64 {
    match noise {
        Noise::Bernoulli => {
            if rng.random::<f64>() < mu {
                1.0
            } else {
                0.0
            }
        }
        Noise::TruncatedNormal { sd } => loop {
            let z: f64 = rng.sample(StandardNormal);
            let r = mu + sd * z;
            if r > 0.0 && r < 1.0 {
                break r;
            }
        },
    }
}

/// Affine map of `raw` onto `[0.1, 0.9]` (min to 0.1, max to 0.9). All-equal
/// input maps to 0.5.
pub fn normalize_means(raw: &[f64]) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return raw.iter().map(|_| 0.5).collect();
    }
    raw.iter()
        .map(|x| (0.1 + 0.8 * (x - lo) / (hi - lo)).clamp(0.1, 0.9))
        .collect()
}
