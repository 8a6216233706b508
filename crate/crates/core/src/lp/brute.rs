use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{check_mu, dot, LpOracle, LpSolution, SolverTag};
use crate::constraints::FairPolytope;
use crate::{Error, Result, EPS, TOL};

/// Desk-scale guard for exhaustive enumeration.
pub const BRUTE_FORCE_MAX_K: usize = 12;

/// One inequality `row . p (>= | <=) rhs` where `row` is an indicator set.
struct Constraint {
    arms: Vec<usize>,
    rhs: f64,
}

fn constraints(polytope: &FairPolytope) -> Option<Vec<Constraint>> {
    let k = polytope.k();
    let mut rows: Vec<Constraint> = (0..k)
        .map(|a| Constraint {
            arms: vec![a],
            rhs: 0.0,
        })
        .collect();
    for (i, g) in polytope.structure().groups().iter().enumerate() {
        let (l, u) = (polytope.lower()[i], polytope.upper()[i]);
        if g.len() == k {
            // the group mass is pinned to 1 by the simplex
            if u < 1.0 - TOL || l > 1.0 + TOL {
                return None;
            }
            continue;
        }
        // an active `mass >= 0` or `mass <= 1` row is spanned by
        // nonnegativity rows that are then active too
        if l > 0.0 {
            rows.push(Constraint {
                arms: g.clone(),
                rhs: l,
            });
        }
        if u < 1.0 {
            rows.push(Constraint {
                arms: g.clone(),
                rhs: u,
            });
        }
    }
    Some(rows)
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `None` when the system is (numerically) singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-10 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            b.swap(pivot, col);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * x[c];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}

/// Next `size`-subset of `0..m` in lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let size = idx.len();
    let mut i = size;
    while i > 0 {
        i -= 1;
        if idx[i] < m - size + i {
            idx[i] += 1;
            for j in i + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TOL)
}

/// All vertices of the polytope, deduplicated at `1e-9` in the max norm and
/// listed in lexicographic order.
///
/// Every vertex is a basic feasible solution: `k - 1` inequalities held at
/// equality together with `sum p = 1`.
pub fn enumerate_vertices(polytope: &FairPolytope) -> Result<Vec<Vec<f64>>> {
    let k = polytope.k();
    if k > BRUTE_FORCE_MAX_K {
        return Err(Error::TooLarge {
            k,
            max: BRUTE_FORCE_MAX_K,
        });
    }
    let Some(rows) = constraints(polytope) else {
        return Ok(Vec::new());
    };
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut consider = |x: Vec<f64>| {
        if polytope.contains(&x, TOL) && !found.iter().any(|v| same_point(v, &x)) {
            found.push(x);
        }
    };
    if k == 1 {
        consider(vec![1.0]);
    } else if rows.len() >= k - 1 {
        let mut idx: Vec<usize> = (0..k - 1).collect();
        let mut a = vec![0.0; k * k];
        let mut b = vec![0.0; k];
        loop {
            a.iter_mut().for_each(|x| *x = 0.0);
            a[..k].iter_mut().for_each(|x| *x = 1.0);
            b[0] = 1.0;
            for (r, &c) in idx.iter().enumerate() {
                for &arm in &rows[c].arms {
                    a[(r + 1) * k + arm] = 1.0;
                }
                b[r + 1] = rows[c].rhs;
            }
            if let Some(mut x) = solve_dense(&mut a, &mut b, k) {
                for v in x.iter_mut() {
                    if v.abs() < EPS {
                        *v = 0.0;
                    }
                }
                consider(x);
            }
            if !next_combination(&mut idx, rows.len()) {
                break;
            }
        }
    }
    found.sort_by(|a, b| lex_cmp(a, b));
    Ok(found)
}

/// Exact reference oracle by vertex enumeration (`k <= 12`).
#[derive(Debug, Clone)]
pub struct BruteForce {
    k: usize,
    vertices: Vec<Vec<f64>>,
}

impl BruteForce {
    pub fn new(polytope: &FairPolytope) -> Result<Self> {
        let vertices = enumerate_vertices(polytope)?;
        if vertices.is_empty() {
            return Err(Error::Infeasible("the polytope has no vertex".into()));
        }
        Ok(Self {
            k: polytope.k(),
            vertices,
        })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
}

impl LpOracle for BruteForce {
    /// Maximal objective; among near-ties (`1e-12`) the lexicographically
    /// smallest vertex.
    fn solve(&self, mu: &[f64]) -> Result<LpSolution> {
        check_mu(mu, self.k)?;
        let mut best = 0;
        let mut best_obj = dot(mu, &self.vertices[0]);
        for (i, v) in self.vertices.iter().enumerate().skip(1) {
            // vertices are sorted, so a near-tie keeps the earlier one
            let obj = dot(mu, v);
            if obj > best_obj + EPS {
                best = i;
                best_obj = obj;
            }
        }
        Ok(LpSolution {
            p: self.vertices[best].clone(),
            objective: best_obj,
            solver: SolverTag::BruteForce,
        })
    }

    fn tag(&self) -> SolverTag {
        SolverTag::BruteForce
    }

    fn k(&self) -> usize {
        self.k
    }
}

pub fn solve_oracle_bruteforce(mu: &[f64], polytope: &FairPolytope) -> Result<LpSolution> {
    BruteForce::new(polytope)?.solve(mu)
}

/// Gap between the best and second-best vertex objective.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaReport {
    pub gamma: f64,
    pub best_vertex: Vec<f64>,
    pub second_vertex: Vec<f64>,
    pub vertex_count: usize,
    /// The best objective is attained by more than one vertex.
    pub degenerate: bool,
}

pub fn compute_gamma(mu: &[f64], polytope: &FairPolytope) -> Result<GammaReport> {
    check_mu(mu, polytope.k())?;
    let vertices = enumerate_vertices(polytope)?;
    if vertices.is_empty() {
        return Err(Error::Infeasible("the polytope has no vertex".into()));
    }
    if vertices.len() < 2 {
        return Err(Error::DegeneratePolytope);
    }
    let mut scored: Vec<(f64, usize)> = vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (dot(mu, v), i))
        .collect();
    // stable on index, so equal objectives keep lexicographic order
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let raw = scored[0].0 - scored[1].0;
    let degenerate = raw <= TOL;
    Ok(GammaReport {
        gamma: if degenerate { 0.0 } else { raw },
        best_vertex: vertices[scored[0].1].clone(),
        second_vertex: vertices[scored[1].1].clone(),
        vertex_count: vertices.len(),
        degenerate,
    })
}
