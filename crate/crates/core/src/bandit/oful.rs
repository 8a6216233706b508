//! L1-OFUL: optimism over a weighted 1-norm confidence ball.
//!
//! The learner keeps the regularized least-squares statistics
//! `V = I + sum p p^T`, `b = sum r p` and `mu_hat = V^{-1} b`. Each round it
//! plays the fair distribution that is best for the most optimistic vertex
//! of `{mu : |V^{1/2} (mu - mu_hat)|_1 <= sqrt(k beta)}`, a ball with exactly
//! `2k` vertices `mu_hat +- radius * V^{-1/2} e_i`. Swapping the two maxima
//! turns the round into `2k` LP calls.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::lp::LpOracle;
use crate::{Error, Result};

/// Confidence and norm parameters of the learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfulConfig {
    /// Failure probability, in `(0, 1)`.
    pub delta: f64,
    /// Bound on `|mu*|_2`.
    pub sigma: f64,
    /// Recompute `V^{-1}` and `log det V` from `V` every this many updates.
    pub refresh_every: u64,
}

impl OfulConfig {
    /// `sigma = sqrt(k)`, the loosest bound for means in `[0, 1]^k`.
    pub fn for_arms(k: usize, delta: f64) -> Self {
        Self {
            delta,
            sigma: libm::sqrt(k as f64),
            refresh_every: 1000,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OfulState {
    v: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    log_det: f64,
    b: DVector<f64>,
    mu_hat: DVector<f64>,
    t: u64,
    config: OfulConfig,
    since_refresh: u64,
}

/// The selected distribution and which ball vertex produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct OfulChoice {
    pub p: Vec<f64>,
    pub objective: f64,
    /// Position in [`ConfidenceBall::vertices`] order.
    pub vertex: usize,
    pub lp_calls: u64,
}

impl OfulState {
    pub fn new(k: usize, config: OfulConfig) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("arm count must be positive".into()));
        }
        config.check()?;
        Ok(Self {
            v: DMatrix::identity(k, k),
            v_inv: DMatrix::identity(k, k),
            log_det: 0.0,
            b: DVector::zeros(k),
            mu_hat: DVector::zeros(k),
            t: 1,
            config,
            since_refresh: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    /// Round about to be played, starting at 1.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &OfulConfig {
        &self.config
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn v_inv(&self) -> &DMatrix<f64> {
        &self.v_inv
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn mu_hat(&self) -> &DVector<f64> {
        &self.mu_hat
    }

    /// `beta_t = (sqrt(2 log(sqrt(det V) / delta)) + sigma)^2`, evaluated as
    /// `(sqrt(log det V - 2 log delta) + sigma)^2`.
    pub fn beta(&self) -> f64 {
        let inner = (self.log_det - 2.0 * libm::log(self.config.delta)).max(0.0);
        let s = libm::sqrt(inner) + self.config.sigma;
        s * s
    }

    /// `sqrt(k beta_t)`.
    pub fn radius(&self) -> f64 {
        libm::sqrt(self.k() as f64 * self.beta())
    }

    pub fn confidence_ball(&mut self) -> Result<ConfidenceBall> {
        let eig = match symmetric_eigen(&self.v) {
            Some(e) => e,
            None => {
                // drifted away from symmetric positive definite: rebuild
                self.v = (&self.v + self.v.transpose()) * 0.5;
                self.refresh()?;
                symmetric_eigen(&self.v)
                    .ok_or_else(|| Error::Numerical("eigendecomposition of V failed".into()))?
            }
        };
        let q = &eig.eigenvectors;
        let sqrt_l = eig.eigenvalues.map(libm::sqrt);
        let inv_sqrt_l = sqrt_l.map(|x| 1.0 / x);
        let sqrt_v = q * DMatrix::from_diagonal(&sqrt_l) * q.transpose();
        let inv_sqrt_v = q * DMatrix::from_diagonal(&inv_sqrt_l) * q.transpose();
        Ok(ConfidenceBall {
            center: self.mu_hat.clone(),
            radius: self.radius(),
            sqrt_v,
            inv_sqrt_v,
        })
    }

    /// Optimistic fair distribution: the LP solution of the ball vertex with
    /// the highest LP value. Ties keep the earlier vertex.
    pub fn select(&mut self, oracle: &dyn LpOracle) -> Result<OfulChoice> {
        let ball = self.confidence_ball()?;
        let k = self.k();
        let mut best: Option<OfulChoice> = None;
        let mut mu = Vec::with_capacity(k);
        for idx in 0..2 * k {
            ball.vertex_into(idx, &mut mu);
            let sol = oracle.solve(&mu)?;
            if best.as_ref().map_or(true, |b| sol.objective > b.objective) {
                best = Some(OfulChoice {
                    p: sol.p,
                    objective: sol.objective,
                    vertex: idx,
                    lp_calls: 0,
                });
            }
        }
        let mut choice = best.expect("at least two vertices");
        choice.lp_calls = 2 * k as u64;
        Ok(choice)
    }

    /// Rank-one update with the played distribution `p` and reward `r`.
    pub fn update(&mut self, p: &[f64], r: f64) -> Result<()> {
        let k = self.k();
        if p.len() != k {
            return Err(Error::LengthMismatch {
                expected: k,
                found: p.len(),
            });
        }
        let x = DVector::from_column_slice(p);
        let vx = &self.v_inv * &x;
        let denom = 1.0 + x.dot(&vx);
        self.v_inv -= (&vx * vx.transpose()) / denom;
        self.log_det += libm::log(denom);
        self.v += &x * x.transpose();
        self.b += &x * r;
        self.t += 1;
        self.since_refresh += 1;
        if self.config.refresh_every > 0 && self.since_refresh >= self.config.refresh_every {
            self.refresh()?;
        } else {
            self.mu_hat = &self.v_inv * &self.b;
        }
        Ok(())
    }

    /// Recomputes `V^{-1}`, `log det V` and `mu_hat` from `V` and `b`.
    pub fn refresh(&mut self) -> Result<()> {
        let chol = self
            .v
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("V is not positive definite".into()))?;
        self.log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| libm::log(*d)).sum::<f64>();
        self.v_inv = chol.inverse();
        self.mu_hat = &self.v_inv * &self.b;
        self.since_refresh = 0;
        Ok(())
    }

    /// Flat checkpoint record: `[t, k, V (row-major, k*k), b (k)]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let k = self.k();
        let mut out = Vec::with_capacity(2 + k * k + k);
        out.push(self.t as f64);
        out.push(k as f64);
        for r in 0..k {
            for c in 0..k {
                out.push(self.v[(r, c)]);
            }
        }
        out.extend(self.b.iter());
        out
    }

    /// Restores a state written by [`to_flat`](Self::to_flat); the inverse,
    /// log-determinant and estimate are recomputed.
    pub fn from_flat(record: &[f64], config: OfulConfig) -> Result<Self> {
        let bad = || Error::Config("malformed OFUL checkpoint record".into());
        if record.len() < 2 {
            return Err(bad());
        }
        let k = record[1] as usize;
        if k == 0 || record.len() != 2 + k * k + k || record[0] < 1.0 {
            return Err(bad());
        }
        let mut s = Self::new(k, config)?;
        s.t = record[0] as u64;
        s.v = DMatrix::from_row_slice(k, k, &record[2..2 + k * k]);
        s.b = DVector::from_column_slice(&record[2 + k * k..]);
        s.refresh()?;
        Ok(s)
    }
}

fn symmetric_eigen(v: &DMatrix<f64>) -> Option<SymmetricEigen<f64, nalgebra::Dyn>> {
    let eig = SymmetricEigen::try_new(v.clone(), f64::EPSILON, 10_000)?;
    // V >= I; anything clearly below that is numerical trouble
    if eig.eigenvalues.iter().any(|&l| !(l > 0.5)) {
        return None;
    }
    Some(eig)
}

/// `{mu : |V^{1/2} (mu - center)|_1 <= radius}`.
#[derive(Debug, Clone)]
pub struct ConfidenceBall {
    pub center: DVector<f64>,
    pub radius: f64,
    sqrt_v: DMatrix<f64>,
    inv_sqrt_v: DMatrix<f64>,
}

impl ConfidenceBall {
    /// Vertex `idx`: `center + radius * W e_{idx/2}` for even `idx`, with a
    /// minus sign for odd `idx`, where `W = V^{-1/2}`.
    fn vertex_into(&self, idx: usize, out: &mut Vec<f64>) {
        let col = self.inv_sqrt_v.column(idx / 2);
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        out.clear();
        out.extend(
            self.center
                .iter()
                .zip(col.iter())
                .map(|(c, w)| c + sign * self.radius * w),
        );
    }

    /// All `2k` vertices, ordered `+e_0, -e_0, +e_1, -e_1, ...`.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        (0..2 * self.center.len())
            .map(|i| {
                let mut v = Vec::new();
                self.vertex_into(i, &mut v);
                v
            })
            .collect()
    }

    /// `|V^{1/2} (mu - center)|_1`.
    pub fn distance(&self, mu: &[f64]) -> f64 {
        let d = DVector::from_column_slice(mu) - &self.center;
        (&self.sqrt_v * d).iter().map(|x| x.abs()).sum()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        self.distance(mu) <= self.radius * (1.0 + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{FairPolytope, FairnessBounds, GroupStructure};
    use crate::lp::{oracle_for, solve_partition_greedy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(k: usize) -> OfulState {
        OfulState::new(
            k,
            OfulConfig {
                delta: 0.1,
                sigma: 1.0,
                refresh_every: 1000,
            },
        )
        .unwrap()
    }

    #[test]
    fn beta_closed_form() {
        let mut s = state(2);
        s.config.delta = libm::exp(-1.0);
        s.config.sigma = 1.5;
        let expected = (libm::sqrt(2.0) + 1.5) * (libm::sqrt(2.0) + 1.5);
        assert!((s.beta() - expected).abs() < 1e-12);

        s.config.sigma = 1.0;
        s.config.delta = 1.0 - 1e-12;
        assert!((s.beta() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn beta_grows_after_update() {
        let mut s = state(2);
        let before = s.beta();
        s.update(&[1.0, 0.0], 1.0).unwrap();
        assert!((s.log_det() - libm::log(2.0)).abs() < 1e-15);
        assert!(s.beta() > before);
    }

    #[test]
    fn diagonal_rank_one_update() {
        let mut s = state(2);
        s.update(&[1.0, 0.0], 1.0).unwrap();
        assert_eq!(s.v()[(0, 0)], 2.0);
        assert_eq!(s.v()[(1, 1)], 1.0);
        assert!((s.v_inv()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((s.v_inv()[(1, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(s.b().as_slice(), &[1.0, 0.0]);
        assert!((s.mu_hat()[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.mu_hat()[1], 0.0);
        assert_eq!(s.t(), 2);
    }

    #[test]
    fn zero_reward_still_grows_v() {
        let mut s = state(2);
        s.update(&[0.5, 0.5], 0.0).unwrap();
        assert_eq!(s.b().as_slice(), &[0.0, 0.0]);
        assert_eq!(s.mu_hat().as_slice(), &[0.0, 0.0]);
        assert!((s.v()[(0, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn determinant_lemma_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=8 {
            let mut s = state(k);
            for _ in 0..20 {
                let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                let total: f64 = raw.iter().sum();
                let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
                let before = s.v().determinant();
                let x = DVector::from_column_slice(&p);
                let factor = 1.0 + x.dot(&(s.v().clone().try_inverse().unwrap() * &x));
                s.update(&p, rng.random::<f64>()).unwrap();
                let after = s.v().determinant();
                assert!((after - before * factor).abs() <= 1e-9 * after);
                assert!((s.log_det() - libm::log(after)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identity_ball_vertices() {
        let mut s = state(2);
        let ball = s.confidence_ball().unwrap();
        let r = ball.radius;
        let v = ball.vertices();
        let expect = [[r, 0.0], [-r, 0.0], [0.0, r], [0.0, -r]];
        for (got, want) in v.iter().zip(expect) {
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_ball_vertices() {
        // V = diag(4, 1): W = diag(1/2, 1)
        let mut s = state(2);
        s.v = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![4.0, 1.0]));
        s.refresh().unwrap();
        let ball = s.confidence_ball().unwrap();
        let r = ball.radius;
        let v = ball.vertices();
        assert!((v[0][0] - r / 2.0).abs() < 1e-12 && v[0][1].abs() < 1e-12);
        assert!((v[1][0] + r / 2.0).abs() < 1e-12);
        assert!((v[2][1] - r).abs() < 1e-12 && v[2][0].abs() < 1e-12);
        for x in &v {
            assert!((ball.distance(x) - r).abs() < 1e-8);
        }
    }

    #[test]
    fn vertices_on_the_ball_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = state(5);
        for _ in 0..30 {
            let mut p: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let t: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= t);
            s.update(&p, rng.random::<f64>()).unwrap();
        }
        let ball = s.confidence_ball().unwrap();
        for v in ball.vertices() {
            assert!((ball.distance(&v) - ball.radius).abs() < 1e-8 * ball.radius.max(1.0));
        }
        assert!(ball.contains(s.mu_hat().as_slice()));
    }

    #[test]
    fn first_round_picks_best_positive_axis() {
        let polytope = FairPolytope::new(
            GroupStructure::partition_from_sizes(&[2, 2]).unwrap(),
            FairnessBounds::uniform(2, 0.25, 0.75).unwrap(),
        )
        .unwrap();
        let oracle = oracle_for(&polytope).unwrap();
        let mut s = state(4);
        let choice = s.select(oracle.as_ref()).unwrap();
        // every +r e_i reaches 0.75 r; arm 0 comes first
        assert_eq!(choice.vertex, 0);
        let mut e0 = alloc::vec![0.0; 4];
        e0[0] = 1.0;
        assert_eq!(choice.p, solve_partition_greedy(&e0, &polytope).unwrap().p);
        assert_eq!(choice.p, alloc::vec![0.75, 0.0, 0.25, 0.0]);
        assert_eq!(choice.lp_calls, 8);
        assert!(polytope.contains(&choice.p, 1e-9));
    }

    #[test]
    fn unconstrained_choice_is_a_corner() {
        let polytope = FairPolytope::unconstrained(3).unwrap();
        let oracle = oracle_for(&polytope).unwrap();
        let mut s = state(3);
        s.update(&[0.0, 1.0, 0.0], 1.0).unwrap();
        let c = s.select(oracle.as_ref()).unwrap();
        assert_eq!(c.p.iter().filter(|&&x| x == 1.0).count(), 1);
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut s = state(3);
        s.update(&[0.2, 0.3, 0.5], 1.0).unwrap();
        s.update(&[0.6, 0.3, 0.1], 0.0).unwrap();
        let flat = s.to_flat();
        assert_eq!(flat.len(), 2 + 9 + 3);
        let r = OfulState::from_flat(&flat, *s.config()).unwrap();
        assert_eq!(r.t(), s.t());
        assert!((r.log_det() - s.log_det()).abs() < 1e-12);
        assert!((r.mu_hat() - s.mu_hat()).norm() < 1e-12);
        assert!(OfulState::from_flat(&flat[..5], *s.config()).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(OfulState::new(2, OfulConfig { delta: 1.0, sigma: 1.0, refresh_every: 0 }).is_err());
        assert!(OfulState::new(2, OfulConfig { delta: 0.1, sigma: 0.0, refresh_every: 0 }).is_err());
    }
}
