use alloc::vec;
use alloc::vec::Vec;

use super::brute::{enumerate_vertices, BRUTE_FORCE_MAX_K};
use crate::constraints::{validate, FairPolytope, StructureClass};
use crate::{Error, Result, EPS};

/// An anchor distribution together with the radius of the max-norm ball
/// around it (intersected with the simplex) that stays inside the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct FairPoint {
    pub q: Vec<f64>,
    pub eta: f64,
}

impl FairPoint {
    /// `false` when the ball is a single point (some group pinned by `lower == upper`).
    pub fn has_interior(&self) -> bool {
        self.eta > 0.0
    }
}

/// Largest `eta` such that every distribution within max-norm distance `eta`
/// of `q` lies in the polytope (and keeps every arm's probability
/// nonnegative). Zero when `q` itself is outside.
///
/// A perturbation `d` with `|d|_inf <= eta` and `sum d = 0` can move the
/// mass of a group `G` by at most `eta * min(|G|, k - |G|)`, and any single
/// arm by `eta`; each constraint's slack divided by that coefficient bounds
/// `eta`.
pub fn interior_radius(q: &[f64], polytope: &FairPolytope) -> Result<f64> {
    let k = polytope.k();
    let mass = polytope.structure().group_mass(q)?;
    let mut eta = q.iter().copied().fold(f64::INFINITY, f64::min);
    for (i, g) in polytope.structure().groups().iter().enumerate() {
        let reach = g.len().min(k - g.len()) as f64;
        if reach == 0.0 {
            continue;
        }
        let slack = (polytope.upper()[i] - mass[i]).min(mass[i] - polytope.lower()[i]);
        eta = eta.min(slack / reach);
    }
    if eta < EPS {
        eta = 0.0;
    }
    Ok(eta)
}

/// A default exploration anchor.
///
/// For partitions each group receives `lower_i` plus a share of the slack
/// `1 - sum lower` proportional to `upper_i - lower_i`, spread evenly over
/// the group's arms. Other structures use the centroid of the vertices,
/// which needs `k <= 12`.
pub fn default_fair_point(polytope: &FairPolytope) -> Result<FairPoint> {
    validate(polytope).into_result()?;
    let k = polytope.k();
    let q = match polytope.structure().class() {
        StructureClass::Partition => {
            let lower = polytope.lower();
            let upper = polytope.upper();
            let slack = 1.0 - lower.iter().sum::<f64>();
            let width: f64 = lower.iter().zip(upper).map(|(l, u)| u - l).sum();
            let mut q = vec![0.0; k];
            for (i, g) in polytope.structure().groups().iter().enumerate() {
                let m = if width > 0.0 {
                    lower[i] + slack * (upper[i] - lower[i]) / width
                } else {
                    lower[i]
                };
                let share = m / g.len() as f64;
                for &a in g {
                    q[a] = share;
                }
            }
            q
        }
        _ if k <= BRUTE_FORCE_MAX_K => {
            let vertices = enumerate_vertices(polytope)?;
            let n = vertices.len() as f64;
            let mut q = vec![0.0; k];
            for v in &vertices {
                for (qa, va) in q.iter_mut().zip(v) {
                    *qa += va / n;
                }
            }
            q
        }
        class => {
            return Err(Error::Config(alloc::format!(
                "no default fair point for a {class} structure with k = {k}; supply one explicitly"
            )))
        }
    };
    let eta = interior_radius(&q, polytope)?;
    Ok(FairPoint { q, eta })
}
