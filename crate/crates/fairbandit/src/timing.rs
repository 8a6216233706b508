//! Wall-clock comparison of the two fair learners.

use std::time::Instant;

use fairbandit_core::constraints::FairPolytope;
use fairbandit_core::env::ArmModel;
use fairbandit_core::seed::derive_seed;
use fairbandit_core::sim::{run_single, Algorithm, PolicyParams, RunSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub k: usize,
    pub groups: usize,
    pub horizon: u64,
    pub eps_seconds: f64,
    pub oful_seconds: f64,
    /// `oful_seconds / eps_seconds`.
    pub ratio: f64,
    pub eps_lp_calls_per_round: f64,
    pub oful_lp_calls_per_round: f64,
}

/// Runs Fair-EPS and Fair-OFUL once each for `horizon` rounds in `context`
/// with the same seed.
pub fn timing_report(
    model: &ArmModel,
    polytope: &FairPolytope,
    context: usize,
    horizon: u64,
    seed: u64,
    params: &PolicyParams,
) -> Result<TimingReport> {
    let time = |algorithm| -> Result<(f64, f64)> {
        let spec = RunSpec {
            algorithm,
            model,
            polytope,
            context,
            horizon,
            params,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, context as u64, 0));
        let start = Instant::now();
        let trace = run_single(&spec, &mut rng)?;
        Ok((start.elapsed().as_secs_f64(), trace.lp_calls as f64 / horizon as f64))
    };
    let (eps_seconds, eps_lp) = time(Algorithm::FairEps)?;
    let (oful_seconds, oful_lp) = time(Algorithm::FairOful)?;
    Ok(TimingReport {
        k: model.k(),
        groups: polytope.lower().len(),
        horizon,
        eps_seconds,
        oful_seconds,
        ratio: oful_seconds / eps_seconds.max(f64::MIN_POSITIVE),
        eps_lp_calls_per_round: eps_lp,
        oful_lp_calls_per_round: oful_lp,
    })
}
