use alloc::format;
use alloc::vec::Vec;

use super::{ArmModel, Noise};
use crate::constraints::GroupStructure;
use crate::{Error, Result};

/// Default per-arm base means of each group.
pub const SYNTHETIC_BASE_MEANS: [f64; 4] = [0.28, 0.46, 0.64, 0.82];

/// Two groups of four arms (arms 0..4 and 4..8) and two contexts. In context
/// `s` the arms of group `s` have the base means and the other group's arms
/// have the base means minus `alpha`. Rewards are Bernoulli.
pub fn synthetic_two_group(alpha: f64, base: [f64; 4]) -> Result<ArmModel> {
    if let Some(b) = base.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::Domain(format!("base mean {b} outside (0, 1]")));
    }
    let min = base.iter().copied().fold(f64::INFINITY, f64::min);
    if !(0.0..min).contains(&alpha) {
        return Err(Error::Domain(format!(
            "alpha = {alpha} must lie in [0, {min}) so every mean stays positive"
        )));
    }
    let penalized: Vec<f64> = base.iter().map(|b| b - alpha).collect();
    let context = |preferred: usize| -> Vec<f64> {
        if preferred == 0 {
            base.iter().chain(&penalized).copied().collect()
        } else {
            penalized.iter().chain(&base).copied().collect()
        }
    };
    ArmModel::new(
        alloc::vec!["prefers-group-1".into(), "prefers-group-2".into()],
        alloc::vec![context(0), context(1)],
        Noise::Bernoulli,
        GroupStructure::partition_from_sizes(&[4, 4])?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalized_means() {
        let m = synthetic_two_group(0.1, SYNTHETIC_BASE_MEANS).unwrap();
        let mu = m.means(0).unwrap();
        assert_eq!(&mu[..4], &[0.28, 0.46, 0.64, 0.82]);
        let want = [0.18, 0.36, 0.54, 0.72];
        for (a, b) in mu[4..].iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let mu2 = m.means(1).unwrap();
        assert_eq!(&mu2[4..], &[0.28, 0.46, 0.64, 0.82]);
        assert_eq!(m.k(), 8);
        assert_eq!(m.groups().groups(), &[alloc::vec![0, 1, 2, 3], alloc::vec![4, 5, 6, 7]]);
    }

    #[test]
    fn no_preference() {
        let m = synthetic_two_group(0.0, SYNTHETIC_BASE_MEANS).unwrap();
        assert_eq!(m.means(0).unwrap(), m.means(1).unwrap());
    }

    #[test]
    fn best_arm_mean() {
        for alpha in [0.0, 0.1, 0.25] {
            let m = synthetic_two_group(alpha, SYNTHETIC_BASE_MEANS).unwrap();
            for s in 0..2 {
                let best = m.means(s).unwrap().iter().copied().fold(0.0, f64::max);
                assert_eq!(best, 0.82);
            }
        }
    }

    #[test]
    fn alpha_domain() {
        assert!(synthetic_two_group(0.28, SYNTHETIC_BASE_MEANS).is_err());
        assert!(synthetic_two_group(-0.1, SYNTHETIC_BASE_MEANS).is_err());
        assert!(synthetic_two_group(0.1, [0.0, 0.5, 0.6, 0.7]).is_err());
    }
}
