mod common;

use common::*;
use fairbandit_core::baselines::{naive_distribution, opt_distribution, ran_distribution, ran_theta};
use fairbandit_core::constraints::{
    bounds_from_risk_difference, bounds_from_x_percent_rule, implicit_bounds, tighten_laminar, validate,
    FairPolytope, FairnessBounds, GroupStructure, UniformBound,
};
use fairbandit_core::lp::{
    compute_gamma, default_fair_point, solve_laminar_greedy, solve_oracle_bruteforce, solve_partition_greedy,
};
use proptest::prelude::*;
use rand::Rng;

/// Membership checked constraint by constraint.
fn member_by_hand(p: &[f64], polytope: &FairPolytope, tol: f64) -> bool {
    if p.iter().any(|&x| x < -tol) {
        return false;
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > tol {
        return false;
    }
    for (i, g) in polytope.structure().groups().iter().enumerate() {
        let m: f64 = g.iter().map(|&a| p[a]).sum();
        if m < polytope.lower()[i] - tol || m > polytope.upper()[i] + tol {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn partition_greedy_matches_brute_force(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = partition_instance(6, &mut rng);
        let mu = random_mu(polytope.k(), &mut rng);
        let greedy = solve_partition_greedy(&mu, &polytope).unwrap();
        let brute = solve_oracle_bruteforce(&mu, &polytope).unwrap();
        prop_assert!((greedy.objective - brute.objective).abs() <= 1e-9);
        prop_assert!(polytope.contains(&greedy.p, 1e-9));
        prop_assert!((greedy.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((greedy.objective - dot(&mu, &greedy.p)).abs() <= 1e-12);
    }

    #[test]
    fn membership_agrees_with_the_inequalities(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = if rng.random_bool(0.5) {
            partition_instance(6, &mut rng)
        } else {
            laminar_instance(8, &mut rng)
        };
        let k = polytope.k();
        let mut p = random_simplex(k, &mut rng);
        match rng.random_range(0..4) {
            0 => p[0] -= 0.01,
            1 => p.iter_mut().for_each(|x| *x *= 1.0 + 1e-6),
            _ => {}
        }
        prop_assert_eq!(polytope.contains(&p, 1e-12), member_by_hand(&p, &polytope, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn laminar_greedy_matches_brute_force(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = laminar_instance(8, &mut rng);
        let mu = random_mu(polytope.k(), &mut rng);
        let greedy = solve_laminar_greedy(&mu, &polytope).unwrap();
        let brute = solve_oracle_bruteforce(&mu, &polytope).unwrap();
        prop_assert!((greedy.objective - brute.objective).abs() <= 1e-9,
            "greedy {} brute {}", greedy.objective, brute.objective);
        prop_assert!(polytope.contains(&greedy.p, 1e-9));
        prop_assert!((greedy.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn tightening_keeps_the_optimum(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = laminar_instance(8, &mut rng);
        let tight = tighten_laminar(&polytope).unwrap();
        prop_assert!(validate(&tight).is_feasible());
        for _ in 0..3 {
            let mu = random_mu(polytope.k(), &mut rng);
            let a = solve_oracle_bruteforce(&mu, &polytope).unwrap().objective;
            let b = solve_oracle_bruteforce(&mu, &tight).unwrap().objective;
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn greedy_depends_only_on_the_ranking(seed in any::<u64>(), log_c in -3.0f64..3.0) {
        let mut rng = rng(seed);
        let polytope = partition_instance(6, &mut rng);
        let mu = random_mu(polytope.k(), &mut rng);
        let c = 10f64.powf(log_c);
        let scaled: Vec<f64> = mu.iter().map(|m| c * m).collect();
        let a = solve_partition_greedy(&mu, &polytope).unwrap();
        let b = solve_partition_greedy(&scaled, &polytope).unwrap();
        prop_assert_eq!(a.p, b.p);
    }

    #[test]
    fn solvers_are_deterministic(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = laminar_instance(8, &mut rng);
        let mu = random_mu(polytope.k(), &mut rng);
        prop_assert_eq!(solve_laminar_greedy(&mu, &polytope).unwrap(), solve_laminar_greedy(&mu, &polytope).unwrap());
        prop_assert_eq!(solve_oracle_bruteforce(&mu, &polytope).unwrap(), solve_oracle_bruteforce(&mu, &polytope).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gamma_is_nonnegative_and_perturbation_breaks_ties(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = partition_instance(6, &mut rng);
        let n = vertices(&polytope).len();
        prop_assume!(n >= 2);
        let mu: Vec<f64> = (0..polytope.k()).map(|_| rng.random_range(1..10) as f64 / 10.0).collect();
        let r = compute_gamma(&mu, &polytope).unwrap();
        prop_assert!(r.gamma >= 0.0);
        if r.degenerate {
            let dir: Vec<f64> = (0..mu.len()).map(|_| rng.random::<f64>() - 0.5).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            let moved: Vec<f64> = mu.iter().zip(&dir).map(|(m, d)| m + 1e-3 * d / norm).collect();
            prop_assert!(!compute_gamma(&moved, &polytope).unwrap().degenerate);
        }
    }

    #[test]
    fn baselines_stay_fair(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = partition_instance(6, &mut rng);
        let k = polytope.k();
        let naive = naive_distribution(&polytope).unwrap();
        prop_assert!(polytope.contains(&naive, 1e-9));
        let p_unc = random_simplex(k, &mut rng);
        let (_, ran) = ran_distribution(&p_unc, &polytope).unwrap();
        prop_assert!(polytope.contains(&ran, 1e-9));
        let opt = opt_distribution(&random_mu(k, &mut rng), &polytope).unwrap();
        prop_assert!(polytope.contains(&opt, 1e-9));
    }

    #[test]
    fn ran_theta_is_maximal(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = partition_instance(6, &mut rng);
        let p_unc = random_simplex(polytope.k(), &mut rng);
        let theta = ran_theta(&p_unc, &polytope).unwrap();
        let mass = polytope.structure().group_mass(&p_unc).unwrap();
        // theta p_unc completes to a fair distribution iff theta <= 1, it
        // fits under every upper bound and the lower bounds fit in what is left
        let completes = |th: f64, tol: f64| {
            th <= 1.0 + tol
                && mass.iter().zip(polytope.upper()).all(|(m, u)| th * m <= u + tol)
                && mass.iter().zip(polytope.lower()).map(|(m, l)| (th * m).max(*l)).sum::<f64>() <= 1.0 + tol
        };
        prop_assert!(completes(theta, 1e-12));
        prop_assert!(!completes(theta + 1e-6, 0.0));
    }

    #[test]
    fn opt_dominates_sampled_fair_points(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = if rng.random_bool(0.5) {
            partition_instance(6, &mut rng)
        } else {
            laminar_instance(8, &mut rng)
        };
        let mu = random_mu(polytope.k(), &mut rng);
        let best = dot(&mu, &opt_distribution(&mu, &polytope).unwrap());
        let vs = vertices(&polytope);
        for _ in 0..10_000 / 300 + 1 {
            let p = random_member(&vs, &mut rng);
            prop_assert!(dot(&mu, &p) <= best + 1e-12);
        }
    }
}

#[test]
fn opt_dominates_ten_thousand_fair_points() {
    let mut rng = rng(7);
    let polytope = laminar_instance(8, &mut rng);
    let mu = random_mu(polytope.k(), &mut rng);
    let best = dot(&mu, &opt_distribution(&mu, &polytope).unwrap());
    let vs = vertices(&polytope);
    for _ in 0..10_000 {
        let p = random_member(&vs, &mut rng);
        assert!(polytope.contains(&p, 1e-9));
        assert!(dot(&mu, &p) <= best + 1e-12);
    }
}

/// `n` points drawn uniformly from the max-norm ball of radius `eta` around
/// `q`, intersected with the simplex, by rejection on the last coordinate.
fn ball_points<R: Rng>(q: &[f64], eta: f64, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let k = q.len();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut p = q.to_vec();
        let mut shift = 0.0;
        for x in p.iter_mut().take(k - 1) {
            let d = eta * (2.0 * rng.random::<f64>() - 1.0);
            *x += d;
            shift += d;
        }
        if shift.abs() > eta {
            continue;
        }
        p[k - 1] -= shift;
        if p.iter().all(|&x| x >= 0.0) {
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fair_point_ball_is_fair(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let polytope = if rng.random_bool(0.5) {
            partition_instance(6, &mut rng)
        } else {
            laminar_instance(8, &mut rng)
        };
        prop_assume!(polytope.k() >= 2);
        let fp = default_fair_point(&polytope).unwrap();
        prop_assert!(polytope.contains(&fp.q, 1e-9));
        prop_assume!(fp.has_interior());
        for p in ball_points(&fp.q, fp.eta, 10_000, &mut rng) {
            prop_assert!(polytope.contains(&p, 1e-9), "{:?} eta {}", p, fp.eta);
        }
    }
}

proptest! {
    #[test]
    fn risk_difference_bounds_are_tight_enough(beta in 0.0f64..=1.0, g in 1usize..=8, size in 1usize..=3) {
        let b = bounds_from_risk_difference(beta, g, None).unwrap();
        for (l, u) in b.lower().iter().zip(b.upper()) {
            prop_assert!(u - l <= beta + 1e-12);
        }
        let polytope = FairPolytope::new(GroupStructure::partition_from_sizes(&vec![size; g]).unwrap(), b).unwrap();
        prop_assert!(validate(&polytope).is_feasible());
    }

    #[test]
    fn vertex_masses_respect_implicit_bounds(g in 2usize..=4, size in 1usize..=3, x in 0.0f64..=1.0, upper in any::<bool>()) {
        prop_assume!(g * size <= 12);
        let (bound, bounds) = if upper {
            let u = 1.0 / g as f64 + x * (1.0 - 1.0 / g as f64);
            (UniformBound::Upper(u), FairnessBounds::uniform(g, 0.0, u).unwrap())
        } else {
            let l = x / g as f64;
            (UniformBound::Lower(l), FairnessBounds::uniform(g, l, 1.0).unwrap())
        };
        let (lo, hi) = implicit_bounds(bound, g);
        let polytope = FairPolytope::new(GroupStructure::partition_from_sizes(&vec![size; g]).unwrap(), bounds).unwrap();
        for v in vertices(&polytope) {
            for m in polytope.structure().group_mass(&v).unwrap() {
                prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn x_percent_rule_ratio(x in 1e-3f64..=100.0) {
        let m = bounds_from_x_percent_rule(x).unwrap();
        let ratio = m / (1.0 - m);
        prop_assert!((ratio - x / 100.0).abs() <= 1e-12 * (1.0 + x / 100.0));
    }
}
