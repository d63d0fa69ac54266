//! Exhaustive enumeration oracles.
//!
//! Nothing here calls the oracle, counting or sampling code: determinants and
//! family membership are recomputed from scratch so that agreement with the
//! engine is evidence rather than tautology.

use std::collections::{BTreeMap, HashMap};

use num::traits::{One, Signed, ToPrimitive, Zero};
use num::BigInt;

use crate::counting::{Allowed, Family};
use crate::error::{Error, Result};
use crate::field::Q;
use crate::genpoly::{ExplicitSetFunction, FeatureMatrix, Kernel};
use crate::matroid::{Graph, TUMatrix};

pub const MASS_MAX_M: usize = 20;
pub const DISTRIBUTION_MAX_M: usize = 16;
/// Cap on the number of candidate edge sets examined for spanning trees.
pub const TREE_CANDIDATE_LIMIT: u128 = 1 << 22;
pub const MATCHING_MAX_N: usize = 12;

/// A measure given by its defining data.
#[derive(Clone, Copy, Debug)]
pub enum Measure<'a> {
    /// `μ(S) = det(L_{S,S})`.
    Kernel(&'a Kernel),
    /// `μ(S) = det(V_S V_Sᵀ)`.
    Factor(&'a FeatureMatrix),
    Explicit(&'a ExplicitSetFunction),
    /// `μ(S) = det(A_S)²` for `|S| = r`, else 0.
    Matroid(&'a TUMatrix),
}

impl Measure<'_> {
    pub fn m(&self) -> usize {
        match self {
            Measure::Kernel(k) => k.m(),
            Measure::Factor(v) => v.m(),
            Measure::Explicit(f) => f.m(),
            Measure::Matroid(a) => a.m(),
        }
    }
}

/// Determinant by Gaussian elimination over the rationals.
fn det_q(mut a: Vec<Vec<Q>>) -> Q {
    let n = a.len();
    let mut det = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

/// Determinant by Gaussian elimination with partial pivoting in `f64`.
fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

fn members(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

fn exact_factor(v: &FeatureMatrix) -> Result<&[Q]> {
    v.exact_entries()
        .ok_or_else(|| Error::ExactUnsupported("factor has no exact entries".into()))
}

/// Exact `μ(S)`.
pub fn subset_mass(measure: &Measure, subset: &[usize]) -> Result<Q> {
    Ok(match measure {
        Measure::Kernel(k) => {
            let m = k.m();
            let l = k.exact_entries();
            det_q(
                subset
                    .iter()
                    .map(|&i| subset.iter().map(|&j| l[i * m + j].clone()).collect())
                    .collect(),
            )
        }
        Measure::Factor(v) => {
            let (n, q) = (v.n(), exact_factor(v)?);
            let gram = subset
                .iter()
                .map(|&i| {
                    subset
                        .iter()
                        .map(|&j| (0..n).map(|k| &q[i * n + k] * &q[j * n + k]).sum())
                        .collect()
                })
                .collect();
            det_q(gram)
        }
        Measure::Explicit(f) => f.mass(subset.iter().map(|&i| 1usize << i).sum()).clone(),
        Measure::Matroid(a) => {
            if subset.len() != a.r() {
                return Ok(Q::zero());
            }
            let d = det_q(
                subset
                    .iter()
                    .map(|&i| (0..a.r()).map(|j| Q::from_integer(a.get(i, j).into())).collect())
                    .collect(),
            );
            &d * &d
        }
    })
}

/// Floating-point `μ(S)`.
pub fn subset_mass_f64(measure: &Measure, subset: &[usize]) -> f64 {
    match measure {
        Measure::Kernel(k) => {
            let l = k.values();
            det_f64(
                subset
                    .iter()
                    .map(|&i| subset.iter().map(|&j| l[(i, j)]).collect())
                    .collect(),
            )
        }
        Measure::Factor(v) => {
            let x = v.values();
            det_f64(
                subset
                    .iter()
                    .map(|&i| subset.iter().map(|&j| x.row(i).dot(&x.row(j))).collect())
                    .collect(),
            )
        }
        Measure::Explicit(f) => f
            .mass(subset.iter().map(|&i| 1usize << i).sum())
            .to_f64()
            .unwrap_or(f64::NAN),
        Measure::Matroid(a) => {
            if subset.len() != a.r() {
                return 0.0;
            }
            let d = det_f64(
                subset
                    .iter()
                    .map(|&i| (0..a.r()).map(|j| a.get(i, j) as f64).collect())
                    .collect(),
            );
            d * d
        }
    }
}

fn allowed(k: &Allowed, v: i64) -> bool {
    match k {
        Allowed::Set(s) => s.contains(&v),
        Allowed::Interval(lo, hi) => *lo <= v && v <= *hi,
    }
}

/// Family membership, recomputed from the family's defining data.
pub fn is_member(fam: &Family, subset: &[usize]) -> bool {
    let cost = |c: &[i64]| subset.iter().map(|&i| c[i]).sum::<i64>();
    match fam {
        Family::Unconstrained(_) => true,
        Family::Budget(b) => cost(&b.costs) <= b.budget,
        Family::Linear(l) => l
            .constraints()
            .iter()
            .all(|c| allowed(&c.allowed, cost(&c.costs))),
        Family::Partition(p) => p
            .parts()
            .iter()
            .zip(p.quotas())
            .all(|(part, &b)| subset.iter().filter(|i| part.contains(i)).count() == b),
    }
}

fn check_size(measure: &Measure, fam: &Family, limit: usize) -> Result<usize> {
    let m = measure.m();
    if m > limit {
        return Err(Error::TooLarge {
            what: "brute-force ground set",
            size: m,
            limit,
        });
    }
    if fam.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "family over {} elements, measure over {m}",
            fam.m()
        )));
    }
    Ok(m)
}

/// `Σ_{S∈fam} μ(S)` by enumerating all `2^m` subsets.
pub fn constrained_mass_bruteforce(measure: &Measure, fam: &Family) -> Result<Q> {
    let m = check_size(measure, fam, MASS_MAX_M)?;
    let mut total = Q::zero();
    for mask in 0..1usize << m {
        let s = members(mask, m);
        if is_member(fam, &s) {
            total += subset_mass(measure, &s)?;
        }
    }
    Ok(total)
}

/// Floating-point counterpart of [`constrained_mass_bruteforce`].
pub fn constrained_mass_bruteforce_f64(measure: &Measure, fam: &Family) -> Result<f64> {
    let m = check_size(measure, fam, MASS_MAX_M)?;
    Ok((0..1usize << m)
        .map(|mask| members(mask, m))
        .filter(|s| is_member(fam, s))
        .map(|s| subset_mass_f64(measure, &s))
        .sum())
}

/// Exact distribution of `μ` restricted to a family.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    pub m: usize,
    /// Feasible subsets of positive probability (sorted, 0-indexed).
    pub probabilities: BTreeMap<Vec<usize>, Q>,
}

impl DistributionTable {
    pub fn probability(&self, subset: &[usize]) -> Q {
        self.probabilities.get(subset).cloned().unwrap_or_else(Q::zero)
    }

    /// Total variation distance to the empirical distribution of `counts`.
    pub fn total_variation(&self, counts: &HashMap<Vec<usize>, usize>) -> f64 {
        let n: usize = counts.values().sum();
        let mut tv = 0.0;
        for (s, p) in &self.probabilities {
            let emp = *counts.get(s).unwrap_or(&0) as f64 / n as f64;
            tv += (p.to_f64().unwrap_or(f64::NAN) - emp).abs();
        }
        for (s, &c) in counts {
            if !self.probabilities.contains_key(s) {
                tv += c as f64 / n as f64;
            }
        }
        tv / 2.0
    }
}

pub fn exact_distribution(measure: &Measure, fam: &Family) -> Result<DistributionTable> {
    let m = check_size(measure, fam, DISTRIBUTION_MAX_M)?;
    let mut masses = BTreeMap::new();
    let mut total = Q::zero();
    for mask in 0..1usize << m {
        let s = members(mask, m);
        if !is_member(fam, &s) {
            continue;
        }
        let mu = subset_mass(measure, &s)?;
        if mu.is_positive() {
            total += &mu;
            masses.insert(s, mu);
        }
    }
    if total.is_zero() {
        return Err(Error::NullMass);
    }
    for v in masses.values_mut() {
        *v = &*v / &total;
    }
    Ok(DistributionTable {
        m,
        probabilities: masses,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    SpanningTrees,
    PerfectMatchings,
}

/// Optional cost condition on enumerated edge sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostFilter {
    All,
    AtMost { costs: Vec<BigInt>, budget: BigInt },
    Exactly { costs: Vec<BigInt>, target: BigInt },
}

impl CostFilter {
    fn accepts(&self, edges: &[usize]) -> bool {
        match self {
            CostFilter::All => true,
            CostFilter::AtMost { costs, budget } => edges.iter().map(|&e| &costs[e]).sum::<BigInt>() <= *budget,
            CostFilter::Exactly { costs, target } => edges.iter().map(|&e| &costs[e]).sum::<BigInt>() == *target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEnumeration {
    pub count: usize,
    /// Edge-index sets, each sorted.
    pub structures: Vec<Vec<usize>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn is_spanning_tree(n: usize, edges: &[(usize, usize)], chosen: &[usize]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    for &e in chosen {
        let (a, b) = (find(&mut parent, edges[e].0), find(&mut parent, edges[e].1));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

fn for_each_combination(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > m {
        return;
    }
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn matchings(n: usize, edges: &[(usize, usize)], used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let Some(u) = used.iter().position(|x| !x) else {
        let mut s = cur.clone();
        s.sort_unstable();
        out.push(s);
        return;
    };
    used[u] = true;
    for (e, &(a, b)) in edges.iter().enumerate() {
        let v = if a == u {
            b
        } else if b == u {
            a
        } else {
            continue;
        };
        if used[v] {
            continue;
        }
        used[v] = true;
        cur.push(e);
        matchings(n, edges, used, cur, out);
        cur.pop();
        used[v] = false;
    }
    used[u] = false;
}

/// Enumerates spanning trees or perfect matchings of `g` passing `filter`.
pub fn enumerate_graph_structures(g: &Graph, kind: StructureKind, filter: &CostFilter) -> Result<GraphEnumeration> {
    let (n, edges) = (g.n(), g.edges());
    if let CostFilter::AtMost { costs, .. } | CostFilter::Exactly { costs, .. } = filter {
        if costs.len() != edges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} costs for {} edges",
                costs.len(),
                edges.len()
            )));
        }
    }
    let mut structures = Vec::new();
    match kind {
        StructureKind::SpanningTrees => {
            let k = n.saturating_sub(1);
            let candidates = binomial(edges.len(), k);
            if candidates > TREE_CANDIDATE_LIMIT {
                return Err(Error::TooLarge {
                    what: "spanning-tree candidate sets",
                    size: candidates.min(usize::MAX as u128) as usize,
                    limit: TREE_CANDIDATE_LIMIT as usize,
                });
            }
            for_each_combination(edges.len(), k, &mut |chosen| {
                if is_spanning_tree(n, edges, chosen) && filter.accepts(chosen) {
                    structures.push(chosen.to_vec());
                }
            });
        }
        StructureKind::PerfectMatchings => {
            if n > MATCHING_MAX_N {
                return Err(Error::TooLarge {
                    what: "perfect-matching vertex count",
                    size: n,
                    limit: MATCHING_MAX_N,
                });
            }
            if n % 2 == 0 {
                let mut all = Vec::new();
                matchings(n, edges, &mut vec![false; n], &mut Vec::new(), &mut all);
                structures = all.into_iter().filter(|s| filter.accepts(s)).collect();
            }
        }
    }
    Ok(GraphEnumeration {
        count: structures.len(),
        structures,
    })
}
