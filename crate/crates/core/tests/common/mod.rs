//! Random instance generators shared by the property tests.
#![allow(dead_code)]

use fairbandit_core::constraints::{FairPolytope, FairnessBounds, GroupStructure, StructureClass};
use fairbandit_core::lp::enumerate_vertices;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random distribution over `k` arms, often with zero entries.
pub fn random_simplex<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..k)
        .map(|_| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                -(1.0 - rng.random::<f64>()).ln()
            }
        })
        .collect();
    if x.iter().all(|&v| v == 0.0) {
        x[rng.random_range(0..k)] = 1.0;
    }
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

/// Means in [0, 1]; a third of the time rounded to one decimal so ties occur.
pub fn random_mu<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let round = rng.random_bool(0.3);
    (0..k)
        .map(|_| {
            let m: f64 = rng.random();
            if round {
                (m * 10.0).round() / 10.0
            } else {
                m
            }
        })
        .collect()
}

/// Bounds around the group masses of one distribution, which keeps the
/// polytope nonempty. Bounds are sometimes pinned to the mass or left open.
fn bounds_around<R: Rng>(mass: &[f64], rng: &mut R) -> FairnessBounds {
    let mass: Vec<f64> = mass.iter().map(|m| m.clamp(0.0, 1.0)).collect();
    let lower = mass
        .iter()
        .map(|&m| match rng.random_range(0..5) {
            0 => 0.0,
            1 => m,
            _ => m * rng.random::<f64>(),
        })
        .collect();
    let upper = mass
        .iter()
        .map(|&m| match rng.random_range(0..5) {
            0 => 1.0,
            1 => m,
            _ => m + (1.0 - m) * rng.random::<f64>(),
        })
        .collect();
    FairnessBounds::new(lower, upper).unwrap()
}

fn with_bounds_around<R: Rng>(structure: GroupStructure, rng: &mut R) -> FairPolytope {
    let p0 = random_simplex(structure.k(), rng);
    let mass = structure.group_mass(&p0).unwrap();
    let bounds = bounds_around(&mass, rng);
    FairPolytope::new(structure, bounds).unwrap()
}

/// Random arm-to-group assignment with every group nonempty.
pub fn random_partition<R: Rng>(k: usize, g: usize, rng: &mut R) -> GroupStructure {
    let mut arms: Vec<usize> = (0..k).collect();
    arms.shuffle(rng);
    let mut groups = vec![Vec::new(); g];
    for (i, &a) in arms.iter().enumerate() {
        let gi = if i < g { i } else { rng.random_range(0..g) };
        groups[gi].push(a);
    }
    GroupStructure::new(k, groups).unwrap()
}

/// A feasible partition polytope with `k <= max_k` and at most three groups.
pub fn partition_instance<R: Rng>(max_k: usize, rng: &mut R) -> FairPolytope {
    let k = rng.random_range(1..=max_k);
    let g = rng.random_range(1..=k.min(3));
    with_bounds_around(random_partition(k, g, rng), rng)
}

fn split_into<R: Rng>(arms: &[usize], depth: usize, rng: &mut R, out: &mut Vec<Vec<usize>>) {
    if arms.len() < 2 || depth == 0 {
        return;
    }
    let parts = rng.random_range(2..=arms.len().min(3));
    let mut cuts: Vec<usize> = (1..arms.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts[..parts - 1].to_vec();
    cuts.sort_unstable();
    let mut start = 0;
    for end in cuts.into_iter().chain([arms.len()]) {
        let chunk = &arms[start..end];
        if rng.random_bool(0.7) {
            out.push(chunk.to_vec());
        }
        if rng.random_bool(0.6) {
            split_into(chunk, depth - 1, rng, out);
        }
        start = end;
    }
}

/// A random laminar family over `2..=max_k` arms, nested at most three deep.
pub fn random_laminar<R: Rng>(max_k: usize, rng: &mut R) -> GroupStructure {
    loop {
        let k = rng.random_range(2..=max_k);
        let mut arms: Vec<usize> = (0..k).collect();
        arms.shuffle(rng);
        let mut groups = Vec::new();
        if rng.random_bool(0.2) {
            groups.push(arms.clone());
            split_into(&arms, 2, rng, &mut groups);
        } else {
            split_into(&arms, 3, rng, &mut groups);
        }
        if groups.is_empty() {
            continue;
        }
        return GroupStructure::with_class(k, groups, StructureClass::Laminar).unwrap();
    }
}

pub fn laminar_instance<R: Rng>(max_k: usize, rng: &mut R) -> FairPolytope {
    let s = random_laminar(max_k, rng);
    with_bounds_around(s, rng)
}

/// A random convex combination of the polytope's vertices.
pub fn random_member<R: Rng>(vertices: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let w = random_simplex(vertices.len(), rng);
    let k = vertices[0].len();
    let mut p = vec![0.0; k];
    for (v, wi) in vertices.iter().zip(&w) {
        for (pa, va) in p.iter_mut().zip(v) {
            *pa += wi * va;
        }
    }
    p
}

pub fn vertices(polytope: &FairPolytope) -> Vec<Vec<f64>> {
    enumerate_vertices(polytope).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
