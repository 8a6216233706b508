//! Group structures, per-group probability bounds and the fair polytope.
//!
//! A distribution `p` over `k` arms is fair when, for every group `G_i`,
//! `lower_i <= sum_{a in G_i} p_a <= upper_i`. The helpers at the bottom of the
//! module translate common discrimination metrics into such bounds.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result, EPS, TOL};

/// How the groups relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureClass {
    /// Pairwise disjoint groups covering every arm.
    Partition,
    /// Any two groups are either disjoint or nested.
    Laminar,
    /// Arbitrary overlapping groups.
    General,
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureClass::Partition => "partition",
            StructureClass::Laminar => "laminar",
            StructureClass::General => "general",
        })
    }
}

impl core::str::FromStr for StructureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partition" => Ok(StructureClass::Partition),
            "laminar" => Ok(StructureClass::Laminar),
            "general" => Ok(StructureClass::General),
            other => Err(Error::Structure(format!("unknown structure class `{other}`"))),
        }
    }
}

/// Groups of arms over `[0, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStructure {
    k: usize,
    groups: Vec<Vec<usize>>,
    class: StructureClass,
}

impl GroupStructure {
    /// Builds a structure and classifies it as tightly as possible.
    pub fn new(k: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let groups = normalize_groups(k, groups)?;
        let class = classify(k, &groups);
        Ok(Self { k, groups, class })
    }

    /// Builds a structure with a caller-declared class, which must be
    /// consistent with the groups. A partition may be declared laminar or
    /// general, a laminar family may be declared general.
    pub fn with_class(k: usize, groups: Vec<Vec<usize>>, declared: StructureClass) -> Result<Self> {
        let groups = normalize_groups(k, groups)?;
        let actual = classify(k, &groups);
        let consistent = match declared {
            StructureClass::Partition => actual == StructureClass::Partition,
            StructureClass::Laminar => actual != StructureClass::General,
            StructureClass::General => true,
        };
        if !consistent {
            return Err(Error::Structure(format!(
                "groups declared {declared} but form a {actual} structure"
            )));
        }
        Ok(Self {
            k,
            groups,
            class: declared,
        })
    }

    /// Partition of consecutive arms into groups of the given sizes.
    pub fn partition_from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut groups = Vec::with_capacity(sizes.len());
        let mut next = 0;
        for &size in sizes {
            groups.push((next..next + size).collect());
            next += size;
        }
        Self::new(next, groups)
    }

    /// A single group holding every arm.
    pub fn single(k: usize) -> Result<Self> {
        Self::new(k, vec![(0..k).collect()])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn class(&self) -> StructureClass {
        self.class
    }

    /// Mass of `p` on every group.
    pub fn group_mass(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                found: p.len(),
            });
        }
        Ok(self
            .groups
            .iter()
            .map(|g| g.iter().map(|&a| p[a]).sum())
            .collect())
    }

    /// Tree view of a laminar (or partition) structure.
    pub fn laminar_forest(&self) -> Result<LaminarForest> {
        if self.class == StructureClass::General {
            return Err(Error::StructureClass {
                expected: StructureClass::Laminar,
                found: self.class,
            });
        }
        Ok(LaminarForest::build(self))
    }
}

/// `mass_i = sum_{a in G_i} p_a` for every group.
pub fn group_mass(p: &[f64], structure: &GroupStructure) -> Result<Vec<f64>> {
    structure.group_mass(p)
}

fn normalize_groups(k: usize, groups: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Structure("arm count must be positive".into()));
    }
    if groups.is_empty() {
        return Err(Error::Structure("at least one group is required".into()));
    }
    let mut out = Vec::with_capacity(groups.len());
    for (i, mut g) in groups.into_iter().enumerate() {
        if g.is_empty() {
            return Err(Error::Structure(format!("group {i} is empty")));
        }
        if let Some(&a) = g.iter().find(|&&a| a >= k) {
            return Err(Error::Structure(format!(
                "group {i} contains arm {a}, outside [0, {k})"
            )));
        }
        g.sort_unstable();
        if g.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Structure(format!("group {i} lists an arm twice")));
        }
        out.push(g);
    }
    Ok(out)
}

fn classify(k: usize, groups: &[Vec<usize>]) -> StructureClass {
    let mut owner = vec![usize::MAX; k];
    let mut disjoint = true;
    for (i, g) in groups.iter().enumerate() {
        for &a in g {
            if owner[a] != usize::MAX {
                disjoint = false;
            }
            owner[a] = i;
        }
    }
    if disjoint && owner.iter().all(|&o| o != usize::MAX) {
        return StructureClass::Partition;
    }
    for (i, gi) in groups.iter().enumerate() {
        for gj in &groups[i + 1..] {
            let inter = intersection_size(gi, gj);
            if inter > 0 && inter != gi.len() && inter != gj.len() {
                return StructureClass::General;
            }
        }
    }
    StructureClass::Laminar
}

/// Both inputs sorted ascending.
fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Parent/child relation of a laminar family. The implicit root is `[k]`.
///
/// Identical groups are chained: among equal sets the one with the larger
/// index is the child.
#[derive(Debug, Clone)]
pub struct LaminarForest {
    /// `parent[i]` is the smallest group strictly above `i`, if any.
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    /// Groups without a parent.
    pub roots: Vec<usize>,
    /// `covered[i]`: every arm of group `i` lies in one of its children.
    pub covered: Vec<bool>,
    /// Every arm lies in at least one group.
    pub roots_cover_all: bool,
    /// Groups ordered so that children come before their parents.
    pub postorder: Vec<usize>,
    /// For every arm, the groups containing it from innermost to outermost.
    pub chains: Vec<Vec<usize>>,
}

impl LaminarForest {
    fn build(s: &GroupStructure) -> Self {
        let g = s.groups.len();
        let contains = |outer: usize, inner: usize| {
            intersection_size(&s.groups[outer], &s.groups[inner]) == s.groups[inner].len()
        };
        let mut parent = vec![None; g];
        for i in 0..g {
            let size_i = s.groups[i].len();
            let mut best: Option<usize> = None;
            for j in 0..g {
                if j == i || !contains(j, i) {
                    continue;
                }
                let size_j = s.groups[j].len();
                // identical sets: only earlier indices sit above
                if size_j == size_i && j > i {
                    continue;
                }
                best = match best {
                    None => Some(j),
                    Some(b) => {
                        let size_b = s.groups[b].len();
                        if size_j < size_b || (size_j == size_b && j > b) {
                            Some(j)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            parent[i] = best;
        }
        let mut children = vec![Vec::new(); g];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let covered = (0..g)
            .map(|i| {
                let covered: usize = children[i].iter().map(|&c| s.groups[c].len()).sum();
                covered == s.groups[i].len()
            })
            .collect();
        let mut postorder: Vec<usize> = (0..g).collect();
        postorder.sort_by(|&a, &b| {
            s.groups[a]
                .len()
                .cmp(&s.groups[b].len())
                .then_with(|| b.cmp(&a))
        });
        let mut chains = vec![Vec::new(); s.k];
        for &i in &postorder {
            for &a in &s.groups[i] {
                chains[a].push(i);
            }
        }
        let roots_cover_all = chains.iter().all(|c| !c.is_empty());
        Self {
            parent,
            children,
            roots,
            covered,
            roots_cover_all,
            postorder,
            chains,
        }
    }
}

/// Lower and upper mass bounds, one pair per group.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FairnessBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::LengthMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(-TOL..=1.0 + TOL).contains(&l) || !(-TOL..=1.0 + TOL).contains(&u) {
                return Err(Error::Domain(format!(
                    "bounds of group {i} must lie in [0, 1], got ({l}, {u})"
                )));
            }
            if l > u + TOL {
                return Err(Error::Domain(format!(
                    "lower bound {l} exceeds upper bound {u} for group {i}"
                )));
            }
        }
        let clamp = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        Ok(Self {
            lower: clamp(lower),
            upper: clamp(upper),
        })
    }

    /// The same `(lower, upper)` pair for `g` groups.
    pub fn uniform(g: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; g], vec![upper; g])
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// The set of fair distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct FairPolytope {
    structure: GroupStructure,
    bounds: FairnessBounds,
}

impl FairPolytope {
    pub fn new(structure: GroupStructure, bounds: FairnessBounds) -> Result<Self> {
        if structure.group_count() != bounds.len() {
            return Err(Error::LengthMismatch {
                expected: structure.group_count(),
                found: bounds.len(),
            });
        }
        Ok(Self { structure, bounds })
    }

    /// The whole simplex, expressed as one trivial group.
    pub fn unconstrained(k: usize) -> Result<Self> {
        Self::new(GroupStructure::single(k)?, FairnessBounds::uniform(1, 0.0, 1.0)?)
    }

    pub fn structure(&self) -> &GroupStructure {
        &self.structure
    }

    pub fn bounds(&self) -> &FairnessBounds {
        &self.bounds
    }

    pub fn k(&self) -> usize {
        self.structure.k
    }

    pub fn lower(&self) -> &[f64] {
        &self.bounds.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.bounds.upper
    }

    /// Indices of groups whose mass under `p` leaves `[lower - tol, upper + tol]`.
    pub fn violated_groups(&self, p: &[f64], tol: f64) -> Result<Vec<usize>> {
        let mass = self.structure.group_mass(p)?;
        Ok(mass
            .iter()
            .enumerate()
            .filter(|(i, &m)| m < self.bounds.lower[*i] - tol || m > self.bounds.upper[*i] + tol)
            .map(|(i, _)| i)
            .collect())
    }

    /// `p >= 0`, `sum p = 1` and every group mass within its bounds.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.k() {
            return false;
        }
        if p.iter().any(|&x| !(x >= -tol)) {
            return false;
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol {
            return false;
        }
        matches!(self.violated_groups(p, tol), Ok(v) if v.is_empty())
    }

    /// Same polytope with bounds replaced.
    pub fn with_bounds(&self, bounds: FairnessBounds) -> Result<Self> {
        Self::new(self.structure.clone(), bounds)
    }
}

/// Reason a polytope fails (or could not be shown) to be feasible.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    LowerSumExceedsOne { sum: f64 },
    UpperSumBelowOne { sum: f64 },
    /// After propagating child bounds, a group's lower bound passes its upper bound.
    GroupBoundsCrossed { group: usize, lower: f64, upper: f64 },
    /// Exhaustive enumeration found no vertex.
    NoFeasibleVertex,
    /// Too large for exhaustive enumeration of a general structure.
    Unverified { k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LowerSumExceedsOne { sum } => write!(f, "sum of lower bounds {sum} > 1"),
            Violation::UpperSumBelowOne { sum } => write!(f, "sum of upper bounds {sum} < 1"),
            Violation::GroupBoundsCrossed {
                group,
                lower,
                upper,
            } => write!(f, "group {group}: implied lower {lower} > implied upper {upper}"),
            Violation::NoFeasibleVertex => f.write_str("no feasible vertex"),
            Violation::Unverified { k } => {
                write!(f, "general structure with k = {k} arms not verified")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Unverified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub status: Feasibility,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.status == Feasibility::Feasible
    }

    /// `Ok` when feasible, an [`Error::Infeasible`] listing the violations otherwise.
    pub fn into_result(self) -> Result<()> {
        match self.status {
            Feasibility::Feasible => Ok(()),
            _ => {
                let mut msg = String::new();
                for (i, v) in self.violations.iter().enumerate() {
                    if i > 0 {
                        msg.push_str("; ");
                    }
                    msg.push_str(&format!("{v}"));
                }
                Err(Error::Infeasible(msg))
            }
        }
    }
}

/// Largest `k` at which general structures are checked by enumeration.
pub const GENERAL_FEASIBILITY_MAX_K: usize = 12;

/// Decides whether the polytope is nonempty.
pub fn validate(polytope: &FairPolytope) -> FeasibilityReport {
    let mut violations = Vec::new();
    match polytope.structure.class {
        StructureClass::Partition => {
            let lo: f64 = polytope.lower().iter().sum();
            let hi: f64 = polytope.upper().iter().sum();
            if lo > 1.0 + TOL {
                violations.push(Violation::LowerSumExceedsOne { sum: lo });
            }
            if hi < 1.0 - TOL {
                violations.push(Violation::UpperSumBelowOne { sum: hi });
            }
        }
        StructureClass::Laminar => {
            let forest = LaminarForest::build(&polytope.structure);
            let (lower, upper) = tightened_bounds(polytope, &forest);
            for i in 0..lower.len() {
                if lower[i] > upper[i] + TOL {
                    violations.push(Violation::GroupBoundsCrossed {
                        group: i,
                        lower: lower[i],
                        upper: upper[i],
                    });
                }
            }
            let lo: f64 = forest.roots.iter().map(|&r| lower[r]).sum();
            if lo > 1.0 + TOL {
                violations.push(Violation::LowerSumExceedsOne { sum: lo });
            }
            if forest.roots_cover_all {
                let hi: f64 = forest.roots.iter().map(|&r| upper[r]).sum();
                if hi < 1.0 - TOL {
                    violations.push(Violation::UpperSumBelowOne { sum: hi });
                }
            }
        }
        StructureClass::General => {
            if polytope.k() > GENERAL_FEASIBILITY_MAX_K {
                return FeasibilityReport {
                    status: Feasibility::Unverified,
                    violations: vec![Violation::Unverified { k: polytope.k() }],
                };
            }
            match crate::lp::enumerate_vertices(polytope) {
                Ok(v) if !v.is_empty() => {}
                _ => violations.push(Violation::NoFeasibleVertex),
            }
        }
    }
    FeasibilityReport {
        status: if violations.is_empty() {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        },
        violations,
    }
}

/// Bottom-up propagation of child bounds into parents.
fn tightened_bounds(polytope: &FairPolytope, forest: &LaminarForest) -> (Vec<f64>, Vec<f64>) {
    let mut lower = polytope.lower().to_vec();
    let mut upper = polytope.upper().to_vec();
    for &i in &forest.postorder {
        let children = &forest.children[i];
        if children.is_empty() {
            continue;
        }
        let lo: f64 = children.iter().map(|&c| lower[c]).sum();
        lower[i] = lower[i].max(lo);
        // arms of `i` outside every child can absorb any amount
        if forest.covered[i] {
            let hi: f64 = children.iter().map(|&c| upper[c]).sum();
            upper[i] = upper[i].min(hi);
        }
    }
    (lower, upper)
}

/// Raises every laminar lower bound to the sum of its children's lower bounds
/// and lowers every upper bound to the sum of its children's upper bounds
/// (when the children cover the group). The feasible set is unchanged.
pub fn tighten_laminar(polytope: &FairPolytope) -> Result<FairPolytope> {
    let forest = polytope.structure.laminar_forest()?;
    let (lower, upper) = tightened_bounds(polytope, &forest);
    // crossed bounds stay crossed; `validate` reports them
    let bounds = FairnessBounds {
        lower: lower.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(),
        upper: upper.into_iter().map(|x| x.clamp(0.0, 1.0)).collect(),
    };
    FairPolytope::new(polytope.structure.clone(), bounds)
}

/// Bounds guaranteeing a risk difference of at most `beta` for a partition of
/// `g` groups.
///
/// Without `base` the bounds are centred on `1/g`:
/// `lower = max(0, 1/g - beta/2)`, `upper = min(1, lower + beta)`. With `base`
/// the lower bounds are kept and each upper bound is cut to `lower + beta`.
pub fn bounds_from_risk_difference(
    beta: f64,
    g: usize,
    base: Option<&FairnessBounds>,
) -> Result<FairnessBounds> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("risk difference bound {beta} outside [0, 1]")));
    }
    if g == 0 {
        return Err(Error::Domain("group count must be positive".into()));
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) = match base {
        None => {
            let l = (1.0 / g as f64 - beta / 2.0).max(0.0);
            let u = (l + beta).min(1.0);
            (vec![l; g], vec![u; g])
        }
        Some(b) => {
            if b.len() != g {
                return Err(Error::LengthMismatch {
                    expected: g,
                    found: b.len(),
                });
            }
            let upper = b
                .lower()
                .iter()
                .zip(b.upper())
                .map(|(&l, &u)| u.min(l + beta).min(1.0))
                .collect();
            (b.lower().to_vec(), upper)
        }
    };
    let lo: f64 = lower.iter().sum();
    let hi: f64 = upper.iter().sum();
    if lo > 1.0 + TOL || hi < 1.0 - TOL {
        return Err(Error::Infeasible(format!(
            "risk difference bound {beta}: lower sum {lo}, upper sum {hi}"
        )));
    }
    FairnessBounds::new(lower, upper)
}

/// Lower bound on a group's mass implementing the x% disparate-impact rule:
/// `x / (100 + x)`.
pub fn bounds_from_x_percent_rule(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 100.0) {
        return Err(Error::Domain(format!("x% rule needs x in (0, 100], got {x}")));
    }
    Ok(x / (100.0 + x))
}

/// Result of the selection-lift sufficient condition `upper / lower <= beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftCheck {
    Satisfied,
    Violated,
    /// `lower == 0`: the ratio is unbounded.
    Unbounded,
}

pub fn check_lift_bounds(bounds: &FairnessBounds, beta: f64) -> Result<Vec<LiftCheck>> {
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!("lift bound must be >= 1, got {beta}")));
    }
    Ok(bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&l, &u)| {
            if l <= 0.0 {
                LiftCheck::Unbounded
            } else if u / l <= beta + EPS {
                LiftCheck::Satisfied
            } else {
                LiftCheck::Violated
            }
        })
        .collect())
}

/// A uniform bound applied to every group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UniformBound {
    Lower(f64),
    Upper(f64),
}

/// Bound on the risk difference of any distribution in a partition polytope:
/// the widest per-group range once each group's bounds are tightened by what
/// the other groups force, `max(lower_i, 1 - sum_{j != i} upper_j)` and
/// `min(upper_i, 1 - sum_{j != i} lower_j)`. `None` for other structures.
pub fn risk_difference_bound(polytope: &FairPolytope) -> Option<f64> {
    if polytope.structure().class() != StructureClass::Partition {
        return None;
    }
    let lower = polytope.lower();
    let upper = polytope.upper();
    let sum_l: f64 = lower.iter().sum();
    let sum_u: f64 = upper.iter().sum();
    let mut bound: f64 = 0.0;
    for i in 0..lower.len() {
        let lo = lower[i].max(1.0 - (sum_u - upper[i]));
        let hi = upper[i].min(1.0 - (sum_l - lower[i]));
        bound = bound.max(hi - lo);
    }
    Some(bound.max(0.0))
}

/// Effective `(lower, upper)` once the bound implied by the other groups is
/// taken into account. The risk difference of any fair distribution is at
/// most `upper - lower`.
pub fn implicit_bounds(bound: UniformBound, g: usize) -> (f64, f64) {
    let others = g.saturating_sub(1) as f64;
    match bound {
        UniformBound::Upper(u) => ((1.0 - others * u).max(0.0), u),
        UniformBound::Lower(l) => (l, (1.0 - others * l).min(1.0)),
    }
}

/// Largest spread of any group's mass across the given distributions:
/// `max_i (max_s mass_i(p_s) - min_s mass_i(p_s))`.
pub fn empirical_risk_difference<'a, I>(distributions: I, structure: &GroupStructure) -> Result<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let masses = distributions
        .into_iter()
        .map(|p| structure.group_mass(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(risk_difference_of_masses(masses.iter().map(Vec::as_slice)))
}

/// [`empirical_risk_difference`] over precomputed group masses.
pub fn risk_difference_of_masses<'a, I>(masses: I) -> f64
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for m in masses {
        if lo.is_empty() {
            lo = m.to_vec();
            hi = m.to_vec();
            continue;
        }
        for (i, &x) in m.iter().enumerate() {
            lo[i] = lo[i].min(x);
            hi[i] = hi[i].max(x);
        }
    }
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| h - l)
        .fold(0.0, f64::max)
}
